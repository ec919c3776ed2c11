"""Spectral density at fixed frequency and regularity probes.

The density applied to a field is the single-frequency layer of the
diagonalization: bulk-zone k-integrals of <U, W> W over the horizontal
sections, plus the two plasmonic point terms weighted by the curve
Jacobian. Sections are quadratured with the square-root endpoint
substitution so the |theta|^{-1/2} cut singularities integrate cleanly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fields import FieldState, WeightParams, inner_H, norm_weighted
from .geometry import jacobian_E, k_E
from .medium import MediumParams
from .quadrature import QuadConfig
from .transform import SpectralEngine, SpectralMesh, bulk_section_nodes


def sigma_exc(params: MediumParams) -> Tuple[float, ...]:
    """Excluded frequencies where the density is not defined."""
    if params.is_critical:
        return (0.0, params.omega_m, -params.omega_m)
    return (0.0, params.omega_m, -params.omega_m,
            params.omega_p, -params.omega_p)


def _check_admissible(params: MediumParams, lam: float, qc: QuadConfig) -> None:
    scale = max(params.omega_e, params.omega_m)
    for v in sigma_exc(params):
        if abs(lam - v) <= qc.sigma_exc_radius * scale:
            raise ValueError(f"frequency {lam} lies on the excluded set")


@dataclass
class DensityApplyResult:
    """M_lam U together with its per-zone pieces and quadrature diagnostics."""

    lam: float
    field: FieldState
    per_zone: Dict[str, FieldState]
    pairing_UU: float              # <M_lam U, U> from the amplitude sum
    diagnostics: Dict[str, float] = field(default_factory=dict)


def density_mesh(params: MediumParams, lam: float, qc: QuadConfig,
                 grid) -> SpectralMesh:
    """Single-frequency node table: bulk sections plus the EE points."""
    x_extent = max(abs(grid.x[0]), abs(grid.x[-1]))
    y_extent = max(abs(grid.y[0]), abs(grid.y[-1]))
    theta_cut = (qc.filter_frac * math.pi / grid.h_x) * qc.budget_overcut
    ks: List[np.ndarray] = []
    js: List[np.ndarray] = []
    zs: List[np.ndarray] = []
    ws: List[np.ndarray] = []
    for kk, ww, zname, j in bulk_section_nodes(
            params, qc, lam, k_max=math.inf,
            x_extent=x_extent, y_extent=y_extent, theta_cut=theta_cut):
        ks.append(kk)
        ws.append(ww)
        js.append(np.full(kk.size, j, dtype=int))
        zs.append(np.full(kk.size, zname, dtype=object))
    if not params.is_critical:
        blo = min(params.omega_p, params.omega_c)
        bhi = max(params.omega_p, params.omega_c)
        if blo < abs(lam) < bhi:
            ke = k_E(params, abs(lam))
            je = jacobian_E(params, abs(lam))
            ks.append(np.array([-ke, ke]))
            ws.append(np.array([je, je]))
            js.append(np.zeros(2, dtype=int))
            zs.append(np.full(2, "EE", dtype=object))
    if not ks:
        return SpectralMesh(np.empty(0), np.full(0, lam), np.empty(0, int),
                            np.empty(0, object), np.empty(0), abs(lam), 0.0)
    k = np.concatenate(ks)
    return SpectralMesh(
        k=k, lam=np.full(k.size, lam), j=np.concatenate(js),
        zone=np.concatenate(zs).astype(object), weight=np.concatenate(ws),
        lambda_max=abs(lam), k_max=float(np.max(np.abs(k))) if k.size else 0.0)


def apply_density(params: MediumParams, lam: float, U: FieldState,
                  s: float = 1.0, qc: Optional[QuadConfig] = None
                  ) -> DensityApplyResult:
    """M_lam applied to U on U's grid."""
    qc = qc or QuadConfig()
    _check_admissible(params, lam, qc)
    grid = U.grid
    mesh = density_mesh(params, lam, qc, grid)
    if mesh.size == 0:
        zero = FieldState(grid)
        return DensityApplyResult(lam, zero, {}, 0.0, {"nodes": 0.0})
    eng = SpectralEngine(params, mesh, grid, qc)
    amp = eng.forward(U)
    zones = sorted(set(mesh.zone.tolist()))
    rows = np.zeros((len(zones), mesh.size), dtype=complex)
    for i, z in enumerate(zones):
        sel = mesh.zone == z
        rows[i, sel] = amp[sel]
    fields = eng.adjoint_many(rows)
    per_zone = dict(zip(zones, fields))
    total = FieldState(grid)
    for f in fields:
        total.data += f.data
    pair = float(np.sum(mesh.weight * np.abs(amp) ** 2))
    diags = {"nodes": float(mesh.size),
             "ee_points": float(np.count_nonzero(mesh.zone == "EE"))}
    return DensityApplyResult(lam, total, per_zone, pair, diags)


def density_pairing(params: MediumParams, lam: float, U: FieldState,
                    qc: Optional[QuadConfig] = None) -> float:
    """<M_lam U, U> without synthesizing the field (amplitude sum only)."""
    qc = qc or QuadConfig()
    _check_admissible(params, lam, qc)
    mesh = density_mesh(params, lam, qc, U.grid)
    if mesh.size == 0:
        return 0.0
    eng = SpectralEngine(params, mesh, U.grid, qc)
    amp = eng.forward(U)
    return float(np.sum(mesh.weight * np.abs(amp) ** 2))


def _band_lambda_nodes(params: MediumParams, lo: float, hi: float,
                       qc: QuadConfig, panels: int
                       ) -> Tuple[np.ndarray, np.ndarray]:
    """GL nodes on [lo, hi], split at structural frequencies."""
    pts = {lo, hi}
    for v in (params.omega_p, params.omega_c, params.omega_e, params.omega_m):
        for sv in (v, -v):
            if lo < sv < hi:
                pts.add(sv)
    edges = sorted(pts)
    xg, wg = np.polynomial.legendre.leggauss(qc.gl_order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        n = max(2, math.ceil(panels * (b - a) / (hi - lo)))
        for e0, e1 in zip(np.linspace(a, b, n + 1)[:-1], np.linspace(a, b, n + 1)[1:]):
            mid, half = 0.5 * (e0 + e1), 0.5 * (e1 - e0)
            nodes.append(mid + half * xg)
            weights.append(half * wg)
    return np.concatenate(nodes), np.concatenate(weights)


def measure_reconstruction(params: MediumParams, band: Tuple[float, float],
                           U: FieldState, s: float = 1.0,
                           qc: Optional[QuadConfig] = None,
                           panels: int = 24) -> Dict[str, float]:
    """Integral of <M_lam U, U> over a band vs the banded Parseval sum.

    Both numbers estimate the spectral-measure mass of U on the band; they
    come from independent quadratures (fixed-frequency sections integrated
    in lambda, against the global two-dimensional mesh masked to the band).
    """
    from .transform import build_mesh

    qc = qc or QuadConfig()
    lo, hi = band
    if hi <= lo:
        raise ValueError("band must be a nonempty interval")
    scale = max(params.omega_e, params.omega_m)
    for v in sigma_exc(params):
        if lo - 1e-15 <= v <= hi + 1e-15:
            if abs(v - lo) > qc.sigma_exc_radius * scale and \
               abs(v - hi) > qc.sigma_exc_radius * scale:
                raise ValueError("band interior meets the excluded set")
    lam_nodes, lam_w = _band_lambda_nodes(params, lo, hi, qc, panels)
    total = 0.0
    for lv, lw in zip(lam_nodes, lam_w):
        total += lw * density_pairing(params, float(lv), U, qc)
    full = build_mesh(params, qc, grid=U.grid)
    mask = (full.lam >= lo) & (full.lam <= hi)
    eng = SpectralEngine(params, full.subset(mask), U.grid, qc)
    amp = eng.forward(U)
    parseval = float(np.sum(full.weight[mask] * np.abs(amp) ** 2))
    return {"band_integral": total, "band_parseval": parseval,
            "rel_gap": abs(total - parseval) / max(parseval, 1e-300)}


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    slope, _ = np.linalg.lstsq(A, ly, rcond=None)[0]
    return float(slope)


def hoelder_probe(params: MediumParams, lam: float, deltas: Sequence[float],
                  U: FieldState, s: float = 1.0,
                  qc: Optional[QuadConfig] = None
                  ) -> Dict[str, object]:
    """Continuity modulus h(d) = |(M_{lam+d} - M_lam)U|_{H_-s} and its slope."""
    qc = qc or QuadConfig()
    base = apply_density(params, lam, U, s, qc).field
    w = WeightParams(s=s)
    hs: List[float] = []
    for d in deltas:
        shifted = apply_density(params, lam + d, U, s, qc).field
        hs.append(norm_weighted(params, shifted - base, w, sign=-1))
    return {"deltas": list(map(float, deltas)), "h": hs,
            "gamma": fit_loglog(np.abs(np.asarray(deltas, dtype=float)), hs)}


def threshold_probe(params: MediumParams, lam: float, U: FieldState,
                    s: float = 1.0, qc: Optional[QuadConfig] = None
                    ) -> Dict[str, float]:
    """Plasmonic pairing and naive density size as lam approaches Omega_p.

    Returns |<U, W_E>| at the positive-k plasmonic point, the Jacobian
    J_E(lam), and J_E |W_E|^2 in H_{-s}; callers fit the growth/decay
    exponents of these against |lam - Omega_p|.
    """
    qc = qc or QuadConfig()
    if params.is_critical:
        raise ValueError("no plasmonic curve exponents in the critical case")
    _check_admissible(params, lam, qc)
    al = abs(lam)
    ke = k_E(params, al)
    je = jacobian_E(params, al)
    mesh = SpectralMesh(k=np.array([ke]), lam=np.array([lam]),
                        j=np.zeros(1, dtype=int),
                        zone=np.array(["EE"], dtype=object),
                        weight=np.ones(1), lambda_max=al, k_max=ke)
    eng = SpectralEngine(params, mesh, U.grid, qc)
    amp = eng.forward(U)
    W = eng.adjoint(np.ones(1, dtype=complex))
    nw = norm_weighted(params, W, WeightParams(s=s), sign=-1)
    return {"lam": float(lam), "dist": abs(al - params.omega_p),
            "pairing": float(abs(amp[0])), "jacobian": je,
            "naive_density": je * nw * nw,
            "weighted_density": je * float(abs(amp[0])) ** 2}
