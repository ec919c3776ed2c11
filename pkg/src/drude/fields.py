"""Grid-sampled six-component fields, weighted norms, and test sources.

A FieldState stores (E, H_x, H_y, J, K_x, K_y) on a tensor grid whose x = 0
line lies exactly on a grid column. Current components are identically zero
for x < 0 and integrate with restricted trapezoid weights, so the discrete
inner product mirrors the continuous one: full-plane integrals for E and H,
half-plane integrals (weighted by the inverse material constants) for the
induced currents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .medium import MediumParams, Side, mu_lambda

COMPONENTS = ("E", "Hx", "Hy", "J", "Kx", "Ky")
RESTRICTED = (False, False, False, True, True, True)  # x>0 half-plane components


@dataclass(frozen=True)
class WeightParams:
    """Sobolev weight exponent; eta_s(x,y) = (1+x^2)^{s/2} (1+y^2)^{s/2}."""

    s: float = 1.0

    def __post_init__(self) -> None:
        if not self.s > 0.5:
            raise ValueError("weight exponent s must exceed 1/2")


class Grid2:
    """Uniform tensor grid on [-Lx, Lx] x [-Ly, Ly] with x=0 on a grid line."""

    def __init__(self, L_x: float, L_y: float, h_x: float, h_y: float):
        if h_x <= 0 or h_y <= 0:
            raise ValueError("grid spacings must be positive")
        nxh = round(L_x / h_x)
        nyh = round(L_y / h_y)
        if nxh < 1 or nyh < 1:
            raise ValueError("grid must contain the origin strictly inside")
        self.h_x = float(h_x)
        self.h_y = float(h_y)
        self.x = (np.arange(-nxh, nxh + 1) * self.h_x).astype(float)
        self.y = (np.arange(-nyh, nyh + 1) * self.h_y).astype(float)
        self.i0 = nxh  # index of the x=0 column
        # trapezoid weights, full line
        self.wx = np.full(self.x.size, self.h_x)
        self.wx[0] = self.wx[-1] = 0.5 * self.h_x
        self.wy = np.full(self.y.size, self.h_y)
        self.wy[0] = self.wy[-1] = 0.5 * self.h_y
        # trapezoid weights restricted to x >= 0 (current components)
        self.wx_pos = np.zeros_like(self.wx)
        self.wx_pos[self.i0:] = self.h_x
        self.wx_pos[self.i0] = 0.5 * self.h_x
        self.wx_pos[-1] = 0.5 * self.h_x

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.x.size, self.y.size)

    def compatible(self, other: "Grid2") -> bool:
        return (self.x.size == other.x.size and self.y.size == other.y.size
                and np.allclose(self.x, other.x) and np.allclose(self.y, other.y))

    def eta(self, s: float) -> Tuple[np.ndarray, np.ndarray]:
        """Separable weight factors (1+x^2)^{s/2}, (1+y^2)^{s/2}."""
        return (1.0 + self.x**2) ** (s / 2.0), (1.0 + self.y**2) ** (s / 2.0)


class FieldState:
    """Six complex component arrays on a shared grid."""

    def __init__(self, grid: Grid2, arrays: Optional[dict] = None,
                 e_sep: Optional[Tuple[np.ndarray, np.ndarray]] = None):
        self.grid = grid
        self.data = np.zeros((6,) + grid.shape, dtype=complex)
        if arrays:
            for name, arr in arrays.items():
                idx = COMPONENTS.index(name)
                a = np.asarray(arr, dtype=complex)
                if a.shape != grid.shape:
                    raise ValueError(f"component {name} has shape {a.shape}, want {grid.shape}")
                self.data[idx] = a
        for idx, restricted in enumerate(RESTRICTED):
            if restricted:
                self.data[idx, : grid.i0, :] = 0.0
        # optional separable representation of an E-only state (fast pairings)
        self.e_sep = e_sep

    @property
    def E(self) -> np.ndarray:
        return self.data[0]

    @property
    def H(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.data[1], self.data[2]

    def copy(self) -> "FieldState":
        out = FieldState(self.grid)
        out.data = self.data.copy()
        out.e_sep = self.e_sep
        return out

    def __add__(self, other: "FieldState") -> "FieldState":
        _check_grids(self, other)
        out = FieldState(self.grid)
        out.data = self.data + other.data
        return out

    def __sub__(self, other: "FieldState") -> "FieldState":
        _check_grids(self, other)
        out = FieldState(self.grid)
        out.data = self.data - other.data
        return out

    def __mul__(self, c: complex) -> "FieldState":
        out = FieldState(self.grid)
        out.data = self.data * c
        return out

    __rmul__ = __mul__


def _check_grids(U: FieldState, V: FieldState) -> None:
    if not U.grid.compatible(V.grid):
        raise ValueError("field states live on incompatible grids")


def component_weights(params: MediumParams) -> np.ndarray:
    """Material weights of the energy inner product, per component."""
    return np.array([
        params.eps0,
        params.mu0, params.mu0,
        1.0 / (params.eps0 * params.omega_e**2),
        1.0 / (params.mu0 * params.omega_m**2),
        1.0 / (params.mu0 * params.omega_m**2),
    ])


def inner_H(params: MediumParams, U: FieldState, V: FieldState,
            s_weight: float = 0.0) -> complex:
    """Discrete energy inner product (trapezoid), optionally eta_{2*s}-weighted.

    s_weight applies the weight eta_s to *both* arguments, i.e. computes the
    H_s (s>0) or H_{-s} (s<0) inner product.
    """
    _check_grids(U, V)
    g = U.grid
    gw = component_weights(params)
    ex, ey = (g.eta(s_weight) if s_weight != 0.0 else (np.ones_like(g.x), np.ones_like(g.y)))
    wxf = g.wx * ex**2
    wxr = g.wx_pos * ex**2
    wyy = g.wy * ey**2
    total = 0.0 + 0.0j
    for c in range(6):
        wx = wxr if RESTRICTED[c] else wxf
        prod = U.data[c] * np.conj(V.data[c])
        total += gw[c] * np.einsum("i,ij,j->", wx, prod, wyy)
    return complex(total)


def norm_H(params: MediumParams, U: FieldState) -> float:
    return math.sqrt(max(inner_H(params, U, U).real, 0.0))


def norm_weighted(params: MediumParams, U: FieldState, weight: WeightParams,
                  sign: int) -> float:
    """H_{s} (sign=+1) or H_{-s} (sign=-1) norm."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    val = inner_H(params, U, U, s_weight=sign * weight.s)
    return math.sqrt(max(val.real, 0.0))


def pairing(params: MediumParams, U_dual: FieldState, V: FieldState,
            weight: Optional[WeightParams] = None) -> complex:
    """Duality product between H_{-s} and H_s: the plain energy integral.

    The duality bracket extends the inner product, so on grid samples it is
    the unweighted trapezoid sum; the weight argument only documents the
    intended pairing and is not used numerically.
    """
    return inner_H(params, U_dual, V)


def make_source(kind: str, center: Tuple[float, float], width: float,
                grid: Grid2, amplitude: float = 1.0,
                custom: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None) -> FieldState:
    """E-only test sources; automatically divergence-free (H = K = 0)."""
    x0, y0 = center
    if kind == "gaussian_E":
        fx = amplitude * np.exp(-((grid.x - x0) ** 2) / (2.0 * width**2))
        fy = np.exp(-((grid.y - y0) ** 2) / (2.0 * width**2))
        E = np.outer(fx, fy)
        # the trailing tuple lets spectral pairings re-evaluate the x factor
        # on quadratures finer than the grid
        return FieldState(grid, {"E": E},
                          e_sep=(fx.astype(complex), fy.astype(complex),
                                 ("gauss", x0, width, amplitude)))
    if kind == "ring_E":
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        r = np.hypot(X - x0, Y - y0)
        r0 = 3.0 * width
        E = amplitude * np.exp(-((r - r0) ** 2) / (2.0 * width**2))
        return FieldState(grid, {"E": E})
    if kind == "custom":
        if custom is None:
            raise ValueError("custom source requires a callable")
        X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
        return FieldState(grid, {"E": amplitude * np.asarray(custom(X, Y), dtype=complex)})
    raise ValueError(f"unknown source kind: {kind}")


def _ddx(a: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(a)
    out[1:-1, :] = (a[2:, :] - a[:-2, :]) / (2.0 * h)
    return out


def _ddy(a: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(a)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * h)
    return out


def apply_hamiltonian_fd(params: MediumParams, U: FieldState) -> FieldState:
    """Central-difference application of the interface Hamiltonian.

    A U = i * (eps0^{-1}(curl H - Pi J), -mu0^{-1}(curl E + Pi K),
    eps0*Omega_e^2 R E, mu0*Omega_m^2 R H). Rows within one cell of x = 0 mix
    the two media and should be masked by callers measuring residuals.
    """
    g = U.grid
    E, Hx, Hy = U.data[0], U.data[1], U.data[2]
    J, Kx, Ky = U.data[3], U.data[4], U.data[5]
    out = FieldState(g)
    curlH = _ddx(Hy, g.h_x) - _ddy(Hx, g.h_y)
    out.data[0] = 1j * (curlH - J) / params.eps0
    out.data[1] = -1j * (_ddy(E, g.h_y) + Kx) / params.mu0
    out.data[2] = -1j * (-_ddx(E, g.h_x) + Ky) / params.mu0
    i0 = g.i0
    out.data[3][i0:, :] = 1j * params.eps0 * params.omega_e**2 * E[i0:, :]
    out.data[4][i0:, :] = 1j * params.mu0 * params.omega_m**2 * Hx[i0:, :]
    out.data[5][i0:, :] = 1j * params.mu0 * params.omega_m**2 * Hy[i0:, :]
    return out
