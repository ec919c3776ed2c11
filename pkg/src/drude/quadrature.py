"""Quadrature configuration and singularity-aware 1D node generation.

Section endpoints sit on spectral cuts where the integrands of the spectral
density carry an inverse-square-root singularity. The substitution
k = k_end -+ u**2 turns these into smooth integrands; composite
Gauss-Legendre panels in u then converge fast. The same panel engine serves
regular integrals, so a single rule covers both cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances and node budgets shared by the spectral quadratures."""

    tol_inv: float = 1e-12
    tol_disp: float = 1e-10
    tol_curve: float = 1e-12
    nodes_per_interval: int = 64       # k nodes per section interval
    near_cut_window: float = 1e-2      # doubling window around a cut
    near_singular_rtol: float = 1e-8   # |theta| below this * k_0 flags NEAR_SINGULAR
    sigma_exc_radius: float = 1e-6     # exclusion radius around sigma_exc
    lambda_min: float = 0.005          # truncation above lambda = 0
    lambda_max: float = 0.0            # 0 -> derived from source width
    k_max: float = 0.0                 # 0 -> derived from lambda_max
    filter_frac: float = 0.85          # Drude-side anti-alias cutoff / Nyquist
    phase_per_node: float = 1.5        # k-node budget: radians of box phase
    phase_per_panel: float = 6.0       # lambda-panel budget: radians of box phase
    small_lambda_ratio: float = 1.6    # max edge ratio of panels below the band
    budget_overcut: float = 2.0        # resolve oscillations this far past the cutoff
    resonance_floor: float = 1e-5      # smallest panel width against the mu=0 edge
    gl_order: int = 8                  # nodes per Gauss-Legendre panel
    lambda_panels_per_unit: float = 4.0
    pv_window_frac: float = 0.05       # PV window rho = frac * omega_m
    pv_nodes: int = 48                 # nodes per half of the PV window
    osc_nodes_per_period: float = 8.0  # lambda nodes per period of exp(-i*lam*t)
    ee_k_factor: float = 6.0           # EE tail truncation multiplier
    ee_nodes: int = 256                # nodes along the EE line integral
    allow_threshold: bool = False

    def __post_init__(self) -> None:
        if self.nodes_per_interval < 4:
            raise ValueError("nodes_per_interval must be at least 4")
        if self.gl_order < 2:
            raise ValueError("gl_order must be at least 2")


def gauss_legendre_panels(a: float, b: float, n_panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def sqrt_endpoint_nodes(a: float, b: float, n_nodes: int, order: int,
                        singular_left: bool, singular_right: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on (a, b) desingularizing |k-end|**(-1/2) endpoints.

    Each singular endpoint gets the substitution k = end -+ u**2 on its half
    of the interval (dk = 2u du kills the square-root blow-up); regular
    endpoints get plain panels. Nodes are strictly interior to (a, b).
    """
    if not b > a:
        return np.empty(0), np.empty(0)
    m = 0.5 * (a + b)
    n_half = max(order, n_nodes // 2)
    n_panels = max(1, n_half // order)
    ks, ws = [], []

    def half_nodes(lo: float, hi: float, singular_at_lo_end: bool, from_left: bool):
        # lo..hi in k; if singular, substitute from the outer endpoint
        if singular_at_lo_end:
            U = math.sqrt(hi - lo)
            u, wu = gauss_legendre_panels(0.0, U, n_panels, order)
            if from_left:
                k = lo + u * u
            else:
                k = hi - u * u
            return k, 2.0 * u * wu
        k, wk = gauss_legendre_panels(lo, hi, n_panels, order)
        return k, wk

    if singular_left:
        k, w = half_nodes(a, m, True, from_left=True)
    else:
        k, w = half_nodes(a, m, False, from_left=True)
    ks.append(k); ws.append(w)
    if singular_right:
        # substitute from b: spans [m, b]
        U = math.sqrt(b - m)
        u, wu = gauss_legendre_panels(0.0, U, n_panels, order)
        ks.append(b - u * u); ws.append(2.0 * u * wu)
    else:
        k, w = gauss_legendre_panels(m, b, n_panels, order)
        ks.append(k); ws.append(w)
    return np.concatenate(ks), np.concatenate(ws)
