"""Generalized eigenfunctions of the interface Hamiltonian.

Each admissible index (k, lam, j) carries a scalar mode
w(x, y) = A * psi(x) * exp(i*k*y) and its six-component vectorization
(E, H_x, H_y, J, K_x, K_y). Bulk channels j = +-1 are scattered plane waves
incident from vacuum (+1) or from the Drude side (-1); j = 0 is the
interface-guided plasmonic wave. Besides the scalar API, ModeBatch evaluates
many indices at once on a tensor grid, factored as x-profiles times
y-phases, which is what the transform and density quadratures consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .geometry import ZoneLabel
from .medium import MediumParams, Side, mu_lambda, theta_branch_value

# admissible channels per zone
J_SETS = {
    ZoneLabel.DD: (-1, 1),
    ZoneLabel.DI: (-1, 1),
    ZoneLabel.DE: (1,),
    ZoneLabel.EI: (-1,),
    ZoneLabel.EE: (0,),
}


@dataclass(frozen=True)
class ModeIndex:
    k: float
    lam: float
    j: int
    zone: ZoneLabel

    def __post_init__(self) -> None:
        if self.zone not in J_SETS or self.j not in J_SETS[self.zone]:
            raise ValueError(f"channel j={self.j} not admissible in zone {self.zone}")


@dataclass(frozen=True)
class ModeSample:
    w: complex
    dxw: complex
    full: Tuple[complex, complex, complex, complex, complex, complex]


def _check_lam(params: MediumParams, lam) -> None:
    lam = np.asarray(lam, dtype=float)
    if np.any(lam == 0.0) or np.any(np.abs(lam) == params.omega_m):
        raise ValueError("lambda in {0, +-omega_m} is excluded (mu+ pole/zero)")


def wronskian(params: MediumParams, k, lam, zone: ZoneLabel):
    """Dispersion function theta-/mu- + theta+/mu+ with branch-correct roots."""
    if zone is ZoneLabel.BOUNDARY:
        raise ValueError("wronskian is not defined on zone boundaries")
    _check_lam(params, lam)
    th_m = theta_branch_value(params, k, lam, zone.name, Side.VACUUM)
    th_p = theta_branch_value(params, k, lam, zone.name, Side.DRUDE)
    return th_m / params.mu0 + th_p / mu_lambda(params, lam, Side.DRUDE)


class ModeBatch:
    """Vectorized mode data for arrays of admissible indices.

    Holds per-node branched roots, Wronskian, normalization and component
    coefficients, and evaluates x-profiles as (n_x, n_nodes) matrices so
    grid pairings reduce to dense matrix products.
    """

    def __init__(self, params: MediumParams, k: np.ndarray, lam: np.ndarray,
                 j: np.ndarray, zone_names: np.ndarray,
                 near_singular_rtol: float = 1e-8):
        _check_lam(params, lam)
        self.params = params
        self.k = np.asarray(k, dtype=float)
        self.lam = np.asarray(lam, dtype=float)
        self.j = np.asarray(j, dtype=int)
        self.zone_names = np.asarray(zone_names)
        n = self.k.size
        if not (self.lam.size == n and self.j.size == n and self.zone_names.size == n):
            raise ValueError("index arrays must share a common length")

        self.mu_p = mu_lambda(params, self.lam, Side.DRUDE)
        self.th_m = np.empty(n, dtype=complex)
        self.th_p = np.empty(n, dtype=complex)
        for name in np.unique(self.zone_names):
            sel = self.zone_names == name
            self.th_m[sel] = theta_branch_value(params, self.k[sel], self.lam[sel], str(name), Side.VACUUM)
            self.th_p[sel] = theta_branch_value(params, self.k[sel], self.lam[sel], str(name), Side.DRUDE)
        self.wronskian = self.th_m / params.mu0 + self.th_p / self.mu_p

        k0 = math.sqrt(params.eps0 * params.mu0) * np.abs(self.lam)
        self.near_singular = np.zeros(n, dtype=bool)
        bulk = self.j != 0
        th_opp = np.where(self.j > 0, self.th_m, self.th_p)  # theta on the incident side
        self.near_singular[bulk] = np.abs(th_opp[bulk]) < near_singular_rtol * k0[bulk]

        # normalization
        self.A = np.empty(n, dtype=float)
        if np.any(bulk):
            mu_opp = np.where(self.j > 0, params.mu0, self.mu_p)
            with np.errstate(divide="ignore", invalid="ignore"):
                self.A[bulk] = (np.abs(0.5 * self.lam[bulk] * th_opp[bulk] / mu_opp[bulk]) ** 0.5
                                / (math.pi * np.abs(self.wronskian[bulk])))
        plas = self.j == 0
        if np.any(plas):
            kp, lp = self.k[plas], self.lam[plas]
            denom = (4.0 * kp**4 + (params.eps0 * params.mu0) ** 2
                     * (params.omega_e**2 - params.omega_m**2) ** 2) ** 0.25
            self.A[plas] = (lp**2 * np.abs(self.mu_p[plas] * self.th_p[plas]) ** 0.5
                            / (math.sqrt(2.0 * math.pi) * params.omega_m * denom))

        # component coefficients multiplying A * (x-profile) * exp(i*k*y);
        # profiles already absorb the side-dependent 1/mu factors
        lam_ = self.lam
        self.coef = np.empty((6, n), dtype=complex)
        self.coef[0] = 1.0
        self.coef[1] = self.k / lam_
        self.coef[2] = 1j / lam_
        self.coef[3] = 1j * params.eps0 * params.omega_e**2 / lam_
        self.coef[4] = 1j * self.k * params.mu0 * params.omega_m**2 / (self.mu_p * lam_**2)
        self.coef[5] = -params.mu0 * params.omega_m**2 / (self.mu_p * lam_**2)

    @property
    def size(self) -> int:
        return self.k.size

    @staticmethod
    def _exp_outer(th: np.ndarray, x: np.ndarray) -> np.ndarray:
        """exp(th[None, :] * x[:, None]) via a row recurrence on uniform x.

        One complex multiply per entry instead of one exp; relative drift
        is O(n_x * eps) which is far below quadrature accuracy.
        """
        th = th.ravel()
        if x.size > 2:
            d = np.diff(x)
            if np.allclose(d, d[0], rtol=1e-12, atol=0.0):
                out = np.empty((x.size, th.size), dtype=complex)
                out[0] = np.exp(th * x[0])
                step = np.exp(th * d[0])
                for i in range(1, x.size):
                    np.multiply(out[i - 1], step, out=out[i])
                return out
        return np.exp(th[None, :] * x[:, None])

    def profiles(self, x: np.ndarray,
                 hat_width: Optional[float] = None):
        """Mode x-profiles psi and d/dx psi as (n_x, n_nodes) matrices.

        With hat_width h set, samples are the exact convolution of the
        profile with the unit hat (linear-interpolation) kernel of width h:
        each exponential term e^{sx} picks up the closed-form transfer
        factor (e^{sh} + e^{-sh} - 2)/(sh)^2, half-hat variants at region
        edges. Pairing such samples against trapezoid weights integrates
        the mode exactly against the piecewise-linear interpolant of the
        grid field, so arbitrarily fast transverse oscillations neither
        alias nor lose their slow near-interface content.

        Returns (psi, dpsi, psi0r, dpsi0r): the x = 0 row of psi/dpsi is
        the two-sided hat sample used for full-line components, while
        psi0r/dpsi0r hold the right-half-only sample for components
        supported on x >= 0 (None when x = 0 is not among the samples).
        """
        x = np.asarray(x, dtype=float)
        n = self.size
        psi = np.empty((x.size, n), dtype=complex)
        dpsi = np.empty((x.size, n), dtype=complex)
        xneg = x < 0.0
        xpos = ~xneg
        i0 = int(np.searchsorted(x, 0.0))
        has0 = i0 < x.size and x[i0] == 0.0
        psi0r = np.empty(n, dtype=complex) if has0 else None
        dpsi0r = np.empty(n, dtype=complex) if has0 else None
        h = hat_width

        for jval in (-1, 0, 1):
            sel = self.j == jval
            if not np.any(sel):
                continue
            th_m = self.th_m[sel]
            th_p = self.th_p[sel]
            mu_p = self.mu_p[sel]
            mu_m = self.params.mu0
            # exponential-term coefficients: psi = a+ e^{th x} + a- e^{-th x}
            if jval == 1:
                r = (th_p / mu_p) * (mu_m / _safe(th_m))
                a_pos, a_neg = 0.5 * (1.0 - r), 0.5 * (1.0 + r)
                b_pos, b_neg = 0.0, 1.0
            elif jval == -1:
                r = (th_m / mu_m) * (mu_p / _safe(th_p))
                a_pos, a_neg = 1.0, 0.0
                b_pos, b_neg = 0.5 * (1.0 + r), 0.5 * (1.0 - r)
            else:
                a_pos, a_neg = 1.0, 0.0
                b_pos, b_neg = 0.0, 1.0

            for side, region, th, c_pos, c_neg in (
                    ("vac", xneg, th_m, a_pos, a_neg),
                    ("dru", xpos, th_p, b_pos, b_neg)):
                if not np.any(region):
                    continue
                e = self._exp_outer(th, x[region])
                need_inv = np.isscalar(c_neg) and c_neg != 0.0 or not np.isscalar(c_neg)
                ei = 1.0 / e if need_inv else None
                thr = th[None, :]
                if h is None:
                    fp = fm = 1.0
                else:
                    z = th * h
                    fp, fm = _hat_full(z)[None, :], _hat_full(-z)[None, :]
                tp = c_pos * (e * fp) if not np.isscalar(c_pos) or c_pos != 0.0 else 0.0
                tm = c_neg * (ei * fm) if ei is not None else 0.0
                P = tp + tm
                D = thr * (tp - tm)
                rows = np.flatnonzero(region)
                psi[np.ix_(region, sel)] = P
                dpsi[np.ix_(region, sel)] = D
                if h is not None:
                    # half-hat overrides at the region edges
                    z = th * h
                    if side == "vac" and rows.size and rows[0] == 0:
                        gp, gm = _hat_right(z), _hat_right(-z)
                        e0 = e[0]
                        tp0 = c_pos * e0 * gp
                        tm0 = c_neg * gm / e0 if ei is not None else 0.0
                        psi[0, sel] = tp0 + tm0
                        dpsi[0, sel] = th * (tp0 - tm0)
                    if side == "dru" and rows.size and rows[-1] == x.size - 1:
                        gp, gm = _hat_left(z), _hat_left(-z)
                        eL = e[-1]
                        tpL = c_pos * eL * gp
                        tmL = c_neg * gm / eL if ei is not None else 0.0
                        psi[-1, sel] = tpL + tmL
                        dpsi[-1, sel] = th * (tpL - tmL)
            if has0:
                if h is None:
                    gRp = gRm = gLp = gLm = 1.0
                else:
                    zp = th_p * h
                    zm = th_m * h
                    gRp, gRm = _hat_right(zp), _hat_right(-zp)
                    gLp, gLm = _hat_left(zm), _hat_left(-zm)
                r0 = b_pos * gRp + b_neg * gRm
                dr0 = th_p * (b_pos * gRp - b_neg * gRm)
                l0 = a_pos * gLp + a_neg * gLm
                dl0 = th_m * (a_pos * gLp - a_neg * gLm)
                psi0r[sel] = r0
                dpsi0r[sel] = dr0
                if h is None:
                    psi[i0, sel] = r0
                    dpsi[i0, sel] = dr0
                else:
                    psi[i0, sel] = 0.5 * (l0 + r0)
                    dpsi[i0, sel] = 0.5 * (dl0 + dr0)
        return psi, dpsi, psi0r, dpsi0r


def _hat_full(z: np.ndarray) -> np.ndarray:
    """(e^z + e^{-z} - 2)/z^2: hat-kernel transfer factor of e^{sx}, z = sh."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 1.0 + zs * zs / 12.0
    zb = z[~small]
    out[~small] = (np.exp(zb) + np.exp(-zb) - 2.0) / (zb * zb)
    return out


def _hat_right(z: np.ndarray) -> np.ndarray:
    """2(e^z - 1 - z)/z^2: right-half hat at the left edge of a region."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) < 1e-3
    zs = z[small]
    out[small] = 1.0 + zs / 3.0 + zs * zs / 12.0
    zb = z[~small]
    out[~small] = 2.0 * (np.exp(zb) - 1.0 - zb) / (zb * zb)
    return out


def _hat_left(z: np.ndarray) -> np.ndarray:
    """2(e^{-z} - 1 + z)/z^2: left-half hat at the right edge of a region."""
    return _hat_right(-np.asarray(z, dtype=complex))


def _safe(z: np.ndarray) -> np.ndarray:
    """Avoid 0/0 at exact cuts (callers never place nodes there)."""
    out = np.where(z == 0.0, 1.0, z)
    return out


def _index_batch(params: MediumParams, index: ModeIndex) -> ModeBatch:
    return ModeBatch(params,
                     np.array([index.k]), np.array([index.lam]),
                     np.array([index.j]), np.array([index.zone.name]))


def normalization(params: MediumParams, k: float, lam: float, j: int,
                  zone: Optional[ZoneLabel] = None) -> float:
    """Normalization coefficient A for one admissible index."""
    if zone is None:
        from .geometry import classify
        zone = classify(params, k, lam)
    b = _index_batch(params, ModeIndex(k, lam, j, zone))
    A = float(b.A[0])
    if j != 0 and abs(b.wronskian[0]) == 0.0:
        raise ZeroDivisionError("bulk normalization is singular on the plasmonic curve")
    return A


def profile(params: MediumParams, k: float, lam: float, j: int, x: float,
            zone: Optional[ZoneLabel] = None) -> complex:
    """Transverse profile psi at one point."""
    if zone is None:
        from .geometry import classify
        zone = classify(params, k, lam)
    b = _index_batch(params, ModeIndex(k, lam, j, zone))
    psi, _, _, _ = b.profiles(np.array([x]))
    return complex(psi[0, 0])


def profile_dx(params: MediumParams, k: float, lam: float, j: int, x: float,
               zone: Optional[ZoneLabel] = None) -> complex:
    """One-sided derivative d/dx psi (side chosen by the sign of x)."""
    if x == 0.0:
        raise ValueError("profile derivative jumps at x = 0; evaluate one-sided")
    if zone is None:
        from .geometry import classify
        zone = classify(params, k, lam)
    b = _index_batch(params, ModeIndex(k, lam, j, zone))
    _, dpsi, _, _ = b.profiles(np.array([x]))
    return complex(dpsi[0, 0])


def mode_sample(params: MediumParams, index: ModeIndex, x: float, y: float) -> ModeSample:
    """Scalar mode and its six-component vectorization at a point."""
    b = _index_batch(params, index)
    psi, dpsi, _, _ = b.profiles(np.array([x]))
    phase = complex(np.exp(1j * index.k * y))
    A = float(b.A[0])
    w = A * complex(psi[0, 0]) * phase
    dxw = A * complex(dpsi[0, 0]) * phase
    mu_here = params.mu0 if x < 0.0 else complex(b.mu_p[0])
    c = b.coef[:, 0]
    restr = 0.0 if x < 0.0 else 1.0
    full = (
        w,
        complex(c[1]) * w / mu_here,
        complex(c[2]) * dxw / mu_here,
        complex(c[3]) * w * restr,
        complex(c[4]) * w * restr,
        complex(c[5]) * dxw * restr,
    )
    return ModeSample(w=w, dxw=dxw, full=full)
