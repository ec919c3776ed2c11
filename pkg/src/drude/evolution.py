"""Resolvent, limiting absorption, and time evolution via functional calculus.

Off the real axis the resolvent of the propagation operator is a Cauchy
integral of the spectral measure; on the axis its one-sided limits split
into a principal value plus the half-residue i*pi*M_omega. Time evolution
under a time-harmonic forcing applies the bounded Duhamel multiplier
phi_{omega,t}(lam) through the same quadrature machinery, with the extra
rank-one eigenprojections at +-omega_p in the critical case.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .density import apply_density, density_mesh, sigma_exc
from .fields import FieldState, Grid2, WeightParams, norm_H, norm_weighted
from .medium import MediumParams
from .quadrature import QuadConfig, gauss_legendre_panels, sqrt_endpoint_nodes
from .transform import SpectralEngine, SpectralMesh, build_mesh


class LimitSide(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _side(side: Union[LimitSide, str]) -> LimitSide:
    return LimitSide(side) if isinstance(side, str) else side


def phi(omega: float, t: float, lam) -> np.ndarray:
    """Duhamel multiplier i*(e^{-i*lam*t} - e^{-i*omega*t})/(lam - omega).

    Continuous across lam = omega, where the value is t*e^{-i*omega*t};
    bounded by min(t, 2/|lam - omega|). Near the removable singularity the
    difference quotient cancels catastrophically, so it switches to its
    3-term Taylor expansion when |lam - omega|*t < 1e-4.
    """
    if t < 0.0:
        raise ValueError("phi is defined for t >= 0")
    lam = np.asarray(lam, dtype=float)
    d = lam - omega
    dt = d * t
    small = np.abs(dt) < 1e-4
    out = np.empty(lam.shape, dtype=complex)
    safe = np.where(small, 1.0, d)
    out[...] = 1j * (np.exp(-1j * lam * t) - np.exp(-1j * omega * t)) / safe
    series = t * np.exp(-1j * omega * t) * (1.0 - 0.5j * dt - dt * dt / 6.0)
    out = np.where(small, series, out)
    return out if out.ndim else complex(out)


def _structural_freqs(params: MediumParams) -> Tuple[float, ...]:
    vals = {0.0}
    for v in (params.omega_p, params.omega_c, params.omega_e, params.omega_m):
        vals.add(v)
        vals.add(-v)
    return tuple(sorted(vals))


def _check_off_excluded(params: MediumParams, omega: float, qc: QuadConfig) -> None:
    radius = qc.sigma_exc_radius * max(params.omega_e, params.omega_m)
    for v in sigma_exc(params):
        if abs(omega - v) <= radius:
            raise ValueError(f"frequency {omega} is in the excluded set")


class LimitCalculus:
    """Shared quadrature for R(zeta)G at one real anchor frequency.

    The lambda line splits into a symmetric window J = [omega-rho, omega+rho]
    and its exterior. On the exterior the Cauchy kernel is regular and rides
    on the global mesh (window nodes zeroed through the coefficient vector,
    so the mirrored fast path stays alive). Inside the window the constant
    M_omega is subtracted node-by-node and re-added with the analytic value
    of integral dlam/(lam - zeta); what remains is the Hoelder-bounded
    difference quotient, integrated on nodes clustered as omega + rho*v^2.
    """

    def __init__(self, params: MediumParams, omega: float, G: FieldState,
                 qc: Optional[QuadConfig] = None, refine: int = 1,
                 lam_max: Optional[float] = None,
                 k_max: Optional[float] = None):
        qc = qc or QuadConfig()
        _check_off_excluded(params, omega, qc)
        self.params = params
        self.qc = qc
        self.omega = float(omega)
        rho = qc.pv_window_frac * params.omega_m
        # the window must clear every structural frequency so the zone
        # layout (and hence M_lam's smoothness class) is uniform across it
        for v in _structural_freqs(params):
            d = abs(self.omega - v)
            if 0.0 < d < 2.0 * rho:
                rho = 0.5 * d
        self.rho = rho
        grid = G.grid
        lo, hi = self.omega - rho, self.omega + rho
        self.mesh = build_mesh(params, qc, grid=grid, refine=refine,
                               lam_max=lam_max, k_max=k_max,
                               extra_breaks=(abs(lo), abs(hi)))
        self.eng = SpectralEngine(params, self.mesh, grid, qc)
        self.amp = self.eng.forward(G)
        self.exterior = np.abs(self.mesh.lam - self.omega) > rho * (1.0 - 1e-12)

        n_panels = max(1, (qc.pv_nodes * refine) // qc.gl_order)
        v, wv = gauss_legendre_panels(0.0, 1.0, n_panels, qc.gl_order)
        lam_w = np.concatenate([self.omega + rho * v**2,
                                self.omega - rho * v**2])
        self.lam_w = lam_w
        self.w_w = np.concatenate([2.0 * rho * v * wv, 2.0 * rho * v * wv])
        meshes = [density_mesh(params, float(lv), qc, grid) for lv in lam_w]
        self.win_mesh = SpectralMesh(
            k=np.concatenate([m.k for m in meshes]),
            lam=np.concatenate([m.lam for m in meshes]),
            j=np.concatenate([m.j for m in meshes]),
            zone=np.concatenate([m.zone for m in meshes]).astype(object),
            weight=np.concatenate([m.weight * lw
                                   for m, lw in zip(meshes, self.w_w)]),
            lambda_max=float(np.max(np.abs(lam_w))),
            k_max=max(m.k_max for m in meshes))
        self.win_eng = SpectralEngine(params, self.win_mesh, grid, qc)
        self.win_amp = self.win_eng.forward(G)
        self.m_omega = apply_density(params, self.omega, G, qc=qc).field

    def _value(self, zeta: complex, cj_exact: complex) -> FieldState:
        g_ext = np.where(self.exterior, 1.0 / (self.mesh.lam - zeta), 0.0)
        U = self.eng.adjoint(self.amp, coeffs=g_ext)
        U = U + self.win_eng.adjoint(self.win_amp,
                                     coeffs=1.0 / (self.win_mesh.lam - zeta))
        cj_quad = complex(np.sum(self.w_w / (self.lam_w - zeta)))
        return U + (cj_exact - cj_quad) * self.m_omega

    def resolvent(self, zeta: complex) -> FieldState:
        if zeta.imag == 0.0:
            raise ValueError("resolvent requires Im zeta != 0")
        w, r = self.omega, self.rho
        return self._value(zeta, np.log((w + r - zeta) / (w - r - zeta)))

    def boundary(self, side: Union[LimitSide, str]) -> FieldState:
        sgn = 1.0 if _side(side) is LimitSide.PLUS else -1.0
        return self._value(self.omega, sgn * 1j * math.pi)


def resolvent_ac(params: MediumParams, zeta: complex, G: FieldState,
                 s: float = 1.0, qc: Optional[QuadConfig] = None,
                 refine: int = 1, lam_max: Optional[float] = None
                 ) -> FieldState:
    """Cauchy integral of the spectral measure: integral M_lam G/(lam-zeta).

    In the critical case the point spectrum at +-omega_p never enters: the
    quadrature nodes are Gauss points of panels split exactly there. Near
    the real axis the computation is anchored at Re zeta so the window
    subtraction resolves the sharpening kernel; far from it (or when
    Re zeta sits on an excluded frequency) a plain global mesh suffices.
    """
    zeta = complex(zeta)
    if zeta.imag == 0.0:
        raise ValueError("Im zeta = 0: use limit_absorption for boundary values")
    qc = qc or QuadConfig()
    radius = qc.sigma_exc_radius * max(params.omega_e, params.omega_m)
    anchored = (abs(zeta.imag) < 0.5 * qc.pv_window_frac * params.omega_m
                and all(abs(zeta.real - v) > radius for v in sigma_exc(params)))
    if anchored:
        calc = LimitCalculus(params, zeta.real, G, qc=qc, refine=refine,
                             lam_max=lam_max)
        return calc.resolvent(zeta)
    mesh = build_mesh(params, qc, grid=G.grid, refine=refine, lam_max=lam_max)
    eng = SpectralEngine(params, mesh, G.grid, qc)
    amp = eng.forward(G)
    return eng.adjoint(amp, coeffs=1.0 / (mesh.lam - zeta))


def limit_absorption(params: MediumParams, omega: float, G: FieldState,
                     s: float = 1.0, side: Union[LimitSide, str] = LimitSide.PLUS,
                     qc: Optional[QuadConfig] = None, refine: int = 1,
                     lam_max: Optional[float] = None) -> FieldState:
    """One-sided boundary value U_omega^+- of the resolvent on the real axis.

    Sokhotski-Plemelj splitting: principal value plus +-i*pi*M_omega G, the
    principal value realized as the regular exterior integral plus the
    window integral of (M_lam - M_omega)G/(lam - omega) (the symmetric
    window makes the pure M_omega part vanish).
    """
    calc = LimitCalculus(params, omega, G, qc=qc, refine=refine,
                         lam_max=lam_max)
    return calc.boundary(side)


def _plasmon_mesh(params: MediumParams, sign: int, qc: QuadConfig,
                  grid: Grid2, k_hi: Optional[float] = None) -> SpectralMesh:
    """k nodes on |k| > k_c for the critical surface-mode line lam = sign*omega_p."""
    kc = params.k_c
    if k_hi is None:
        k_hi = max(qc.ee_k_factor * kc, math.pi / grid.h_y)
    n = max(qc.ee_nodes, 2 * qc.gl_order)
    # sqrt clustering at the cross point where the mode degenerates, then
    # geometric panels out to the grid's representable wavenumbers
    k1 = min(2.0 * kc, k_hi)
    kk, ww = sqrt_endpoint_nodes(kc, k1, n // 2, qc.gl_order, True, False)
    if k_hi > k1:
        edges = np.geomspace(k1, k_hi, max(4, n // (2 * qc.gl_order)) + 1)
        xg, wg = np.polynomial.legendre.leggauss(qc.gl_order)
        mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * (edges[1:] - edges[:-1])
        kk = np.concatenate([kk, (mid[:, None] + half[:, None] * xg).ravel()])
        ww = np.concatenate([ww, (half[:, None] * wg).ravel()])
    k = np.concatenate([kk, -kk])
    w = np.concatenate([ww, ww])
    lam = np.full(k.size, sign * params.omega_p)
    return SpectralMesh(k=k, lam=lam, j=np.zeros(k.size, dtype=int),
                        zone=np.full(k.size, "EE", dtype=object), weight=w,
                        lambda_max=params.omega_p, k_max=float(k_hi))


def eigenprojection_Op(params: MediumParams, sign: int, G: FieldState,
                       s: float = 1.0, qc: Optional[QuadConfig] = None,
                       k_hi: Optional[float] = None) -> FieldState:
    """Projection onto the embedded eigenspace at sign*omega_p (critical case).

    P G = integral over |k| > k_c of <G, W_{k, sign*omega_p, 0}> W dk,
    truncated at the grid's representable wavenumbers.
    """
    if not params.is_critical:
        raise ValueError("eigenprojection exists only in the critical case")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    qc = qc or QuadConfig()
    mesh = _plasmon_mesh(params, sign, qc, G.grid, k_hi)
    eng = SpectralEngine(params, mesh, G.grid, qc)
    return eng.adjoint(eng.forward(G))


def projection_diagnostics(params: MediumParams, sign: int, G: FieldState,
                           qc: Optional[QuadConfig] = None) -> Dict[str, float]:
    """Idempotence and orthogonality residuals of the eigenprojection."""
    from .fields import pairing

    P1 = eigenprojection_Op(params, sign, G, qc=qc)
    P2 = eigenprojection_Op(params, sign, P1, qc=qc)
    n1 = norm_H(params, P1)
    return {
        "norm_PG": n1,
        "idempotence": norm_H(params, P2 - P1) / max(n1, 1e-300),
        "orthogonality": abs(pairing(params, P1, G - P1, 0.0))
        / max(n1 * n1, 1e-300),
    }


@dataclass
class EvolutionTrace:
    """Time series of the forced evolution U(t) and its diagnostics."""

    times: np.ndarray
    fields: List[FieldState]
    norm_h: np.ndarray                  # ||U(t)||_H
    norm_w: np.ndarray                  # ||U(t)||_{H_{-s}}
    gap: Optional[np.ndarray]           # ||U(t) + i U_w^+ e^{-i w t}||_{H_{-s}}
    omega: float
    s: float
    probe_point: Optional[Tuple[float, float]] = None
    probe_component: int = 0
    probe_times: Optional[np.ndarray] = None
    probe_values: Optional[np.ndarray] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if self.gap is not None and np.any(self.gap < 0.0):
            raise ValueError("gap must be nonnegative")


def _probe_row(eng: SpectralEngine, point: Tuple[float, float],
               component: int) -> np.ndarray:
    """Mode values at one grid point: row V with U(t)[c](x0,y0) = V . (phi*amp)."""
    g = eng.grid
    ix = int(np.argmin(np.abs(g.x - point[0])))
    iy = int(np.argmin(np.abs(g.y - point[1])))
    m = eng.mesh
    out = np.empty(m.size, dtype=complex)
    from .transform import _chunks
    for sl in _chunks(m.size):
        b = eng._batch(sl)
        psi, dpsi, psi_mu, dpsi_mu, p0r, d0r = eng._grid_profiles(b)
        i0 = g.i0
        if component < 3:
            prof = (psi, psi_mu, dpsi_mu)[component][ix]
        else:
            if ix < i0:
                prof = np.zeros(b.k.size, dtype=complex)
            elif ix == i0:
                prof = (p0r, p0r, d0r)[component - 3]
            else:
                prof = (psi, psi, dpsi)[component - 3][ix]
        out[sl] = (m.weight[sl] * b.A * b.coef[component]
                   * prof * np.exp(1j * b.k * g.y[iy]))
    return out


def evolve_spectral(params: MediumParams, G: FieldState, omega: float,
                    times: Sequence[float], s: float = 1.0,
                    qc: Optional[QuadConfig] = None,
                    lam_max: Optional[float] = None,
                    probe_point: Optional[Tuple[float, float]] = None,
                    probe_component: int = 0,
                    probe_times: Optional[Sequence[float]] = None,
                    with_gap: bool = True) -> EvolutionTrace:
    """Forced evolution U(t) = integral phi_{omega,t}(lam) M_lam G dlam.

    The lambda panels shrink with the horizon so every panel keeps at least
    osc_nodes_per_period nodes per period of e^{-i*lam*t}; the forward
    pairings <G, W> are computed once and shared across all times. In the
    critical case the eigenprojections at +-omega_p contribute the extra
    phi_{omega,t}(+-omega_p) P_{+-omega_p} G terms, resonant when
    omega = +-omega_p. The gap against the limiting-amplitude profile
    -i U_omega^+ e^{-i omega t} is reported whenever U_omega^+ exists.
    """
    qc = qc or QuadConfig()
    if omega == 0.0 or abs(abs(omega) - params.omega_m) < 1e-12:
        raise ValueError("omega must avoid 0 and +-omega_m")
    times = np.asarray(times, dtype=float)
    t_max = float(times[-1]) if times.size else 0.0
    if probe_times is not None:
        probe_times = np.asarray(probe_times, dtype=float)
        t_max = max(t_max, float(probe_times[-1]))
    width = math.inf
    if t_max > 0.0:
        width = 2.0 * math.pi * qc.gl_order / (qc.osc_nodes_per_period * t_max)
    mesh = build_mesh(params, qc, grid=G.grid, lam_max=lam_max,
                      max_panel_width=width)
    eng = SpectralEngine(params, mesh, G.grid, qc)
    amp = eng.forward(G)

    crit = params.is_critical
    if crit:
        P_plus = eigenprojection_Op(params, 1, G, s, qc)
        P_minus = eigenprojection_Op(params, -1, G, s, qc)

    rows = np.empty((times.size, mesh.size), dtype=complex)
    for i, t in enumerate(times):
        rows[i] = phi(omega, float(t), mesh.lam) * amp
    fields = eng.adjoint_many(rows)
    if crit:
        wp = params.omega_p
        for i, t in enumerate(times):
            fields[i] = (fields[i] + phi(omega, float(t), wp) * P_plus
                         + phi(omega, float(t), -wp) * P_minus)

    weight = WeightParams(s)
    norm_h = np.array([norm_H(params, U) for U in fields])
    norm_w = np.array([norm_weighted(params, U, weight, sign=-1)
                       for U in fields])

    gap = None
    radius = qc.sigma_exc_radius * max(params.omega_e, params.omega_m)
    bad = set(sigma_exc(params))
    if crit:
        bad |= {params.omega_p, -params.omega_p}
    if with_gap and all(abs(omega - v) > radius for v in bad):
        U_plus = limit_absorption(params, omega, G, s, LimitSide.PLUS, qc,
                                  lam_max=lam_max)
        gap = np.array([
            norm_weighted(params,
                          U + (1j * np.exp(-1j * omega * t)) * U_plus,
                          weight, sign=-1)
            for t, U in zip(times, fields)])

    pv = pt = None
    if probe_point is not None:
        pt = np.asarray(probe_times if probe_times is not None else times,
                        dtype=float)
        row = _probe_row(eng, probe_point, probe_component)
        ph = np.array([row @ (phi(omega, float(t), mesh.lam) * amp)
                       for t in pt])
        if crit:
            gplus = G.grid
            ix = int(np.argmin(np.abs(gplus.x - probe_point[0])))
            iy = int(np.argmin(np.abs(gplus.y - probe_point[1])))
            pp = P_plus.data[probe_component][ix, iy]
            pm = P_minus.data[probe_component][ix, iy]
            wp = params.omega_p
            ph = ph + np.array([phi(omega, float(t), wp) * pp
                                + phi(omega, float(t), -wp) * pm for t in pt])
        pv = ph

    return EvolutionTrace(
        times=times, fields=fields, norm_h=norm_h, norm_w=norm_w, gap=gap,
        omega=omega, s=s, probe_point=probe_point,
        probe_component=probe_component, probe_times=pt, probe_values=pv,
        diagnostics={"mesh_nodes": float(mesh.size),
                     "lambda_panel_width": width})


def propagate_ac(params: MediumParams, U0: FieldState,
                 times: Sequence[float], s: float = 1.0,
                 qc: Optional[QuadConfig] = None,
                 lam_max: Optional[float] = None) -> EvolutionTrace:
    """Free evolution e^{-i t A} P_ac U0 through the same functional calculus."""
    qc = qc or QuadConfig()
    times = np.asarray(times, dtype=float)
    width = math.inf
    if times.size and times[-1] > 0.0:
        width = (2.0 * math.pi * qc.gl_order
                 / (qc.osc_nodes_per_period * float(times[-1])))
    mesh = build_mesh(params, qc, grid=U0.grid, lam_max=lam_max,
                      max_panel_width=width)
    eng = SpectralEngine(params, mesh, U0.grid, qc)
    amp = eng.forward(U0)
    rows = np.exp(-1j * np.outer(times, mesh.lam)) * amp
    fields = eng.adjoint_many(rows)
    weight = WeightParams(s)
    return EvolutionTrace(
        times=times, fields=fields,
        norm_h=np.array([norm_H(params, U) for U in fields]),
        norm_w=np.array([norm_weighted(params, U, weight, sign=-1)
                         for U in fields]),
        gap=None, omega=0.0, s=s,
        diagnostics={"mesh_nodes": float(mesh.size)})


def beat_diagnostic(trace: EvolutionTrace,
                    point: Optional[Tuple[float, float]] = None,
                    component: int = 0,
                    rel_threshold: float = 0.1) -> np.ndarray:
    """Dominant angular frequencies of a probe time series.

    Uses the probe series stored on the trace when available, otherwise
    samples the stored fields at the nearest grid point. Peaks are local
    maxima of the Hann-windowed power spectrum above rel_threshold of the
    strongest one; returns their |angular frequency|, ascending.
    """
    if trace.probe_values is not None and point is None:
        tt, vals = trace.probe_times, trace.probe_values
    else:
        if point is None:
            raise ValueError("trace has no probe series; pass a probe point")
        g = trace.fields[0].grid
        ix = int(np.argmin(np.abs(g.x - point[0])))
        iy = int(np.argmin(np.abs(g.y - point[1])))
        tt = trace.times
        vals = np.array([U.data[component][ix, iy] for U in trace.fields])
    dt = np.diff(tt)
    if not np.allclose(dt, dt[0], rtol=1e-8):
        raise ValueError("beat analysis needs uniformly sampled times")
    n = vals.size
    win = np.hanning(n)
    spec = np.abs(np.fft.fft(vals * win)) ** 2
    freqs = 2.0 * math.pi * np.fft.fftfreq(n, float(dt[0]))
    # constant (DC-dominated) series peak at exactly zero
    peaks = []
    for i in range(n):
        lo, hi = spec[(i - 1) % n], spec[(i + 1) % n]
        if spec[i] >= lo and spec[i] > hi and spec[i] > rel_threshold * spec.max():
            peaks.append(abs(freqs[i]))
    # merge the +-f mirror pairs and Hann sidelobe neighbors
    peaks = sorted(peaks)
    merged: List[float] = []
    df = abs(freqs[1] - freqs[0])
    for p in peaks:
        if merged and abs(p - merged[-1]) <= 1.5 * df:
            continue
        merged.append(p)
    return np.array(merged)
