"""Leapfrog Yee solver for the interface system with auxiliary currents.

Independent brute-force oracle for the spectral machinery: complex-valued
TE fields on a staggered grid, Drude currents integrated by a centered
auxiliary-differential-equation (ADE) update. E and J live at integer time
steps, H and K at half steps, so every current update is second-order
centered. The x = 0 grid line is the last vacuum line; currents live
strictly at x > 0 points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .fields import FieldState, Grid2, WeightParams, norm_H, norm_weighted
from .medium import MediumParams


@dataclass
class YeeState:
    """Staggered complex field arrays plus the time index."""

    E: np.ndarray            # (Nx, Ny) at nodes, integer steps
    Hx: np.ndarray           # (Nx, Ny-1) at (i, j+1/2), half steps
    Hy: np.ndarray           # (Nx-1, Ny) at (i+1/2, j), half steps
    J: np.ndarray            # collocated with E, zero for x <= 0
    Kx: np.ndarray           # collocated with Hx
    Ky: np.ndarray           # collocated with Hy
    n: int = 0               # E, J are at time n*dt; H, K at (n + 1/2)*dt


class YeeSolver:
    """Second-order leapfrog/ADE integrator of the forced interface system.

    The forcing enters as a soft current J_s = -eps0 * g(x, y) H(t) e^{-iwt}
    so the evolved field matches U(t) = int_0^t e^{-i(t-s)A} G e^{-iws} ds
    with G the E-only source of amplitude profile g. Boundaries are
    perfectly reflecting; callers size the box so reflections stay clear of
    the probe region (or enable the experimental graded sponge).
    """

    def __init__(self, params: MediumParams, grid: Grid2, omega: float = 0.0,
                 source_width: float = 1.5,
                 source_center: Tuple[float, float] = (0.0, 0.0),
                 source_amplitude: float = 1.0,
                 cfl_frac: float = 0.9, dt: Optional[float] = None,
                 vacuum: bool = False, sponge: bool = False,
                 sponge_width: float = 2.0, sponge_strength: float = 2.0):
        self.params = params
        self.grid = grid
        self.omega = float(omega)
        h = min(grid.h_x, grid.h_y)
        dt_max = cfl_frac * h / (params.c * math.sqrt(2.0))
        self.dt = float(dt) if dt is not None else dt_max
        if self.dt > dt_max * (1.0 + 1e-12):
            raise ValueError(
                f"time step {self.dt} violates the CFL bound {dt_max}")
        nx, ny = grid.shape
        self.state = YeeState(
            E=np.zeros((nx, ny), complex), Hx=np.zeros((nx, ny - 1), complex),
            Hy=np.zeros((nx - 1, ny), complex), J=np.zeros((nx, ny), complex),
            Kx=np.zeros((nx, ny - 1), complex),
            Ky=np.zeros((nx - 1, ny), complex))
        self._h_prev: Optional[Tuple[np.ndarray, np.ndarray]] = None
        self._k_prev: Optional[Tuple[np.ndarray, np.ndarray]] = None

        x0, y0 = source_center
        gx = np.exp(-((grid.x - x0) ** 2) / (2.0 * source_width ** 2))
        gy = np.exp(-((grid.y - y0) ** 2) / (2.0 * source_width ** 2))
        self._g = source_amplitude * np.outer(gx, gy)

        i0 = grid.i0
        self._jmask = np.zeros((nx, ny))
        self._jmask[i0 + 1:, :] = 1.0           # E nodes strictly at x > 0
        self._kxmask = np.zeros((nx, ny - 1))
        self._kxmask[i0 + 1:, :] = 1.0
        self._kymask = np.zeros((nx - 1, ny))
        self._kymask[i0:, :] = 1.0              # Hy points start at x = h/2
        self.vacuum = vacuum
        qe = 0.0 if vacuum else (self.dt * params.omega_e) ** 2 / 4.0
        qm = 0.0 if vacuum else (self.dt * params.omega_m) ** 2 / 4.0
        self._ade_e = ((1.0 - qe) / (1.0 + qe), 1.0 / (1.0 + qe))
        self._ade_h = ((1.0 - qm) / (1.0 + qm), 1.0 / (1.0 + qm))

        self._sigma = None
        if sponge:
            # graded conductivity frame, experimental: absorbs the bulk of
            # an outgoing pulse but is not reflection-free
            sx = self._profile(grid.x, sponge_width, sponge_strength)
            sy = self._profile(grid.y, sponge_width, sponge_strength)
            self._sigma = np.maximum.outer(sx, sy)

    @staticmethod
    def _profile(axis: np.ndarray, width: float, strength: float) -> np.ndarray:
        d = np.maximum(axis - (axis[-1] - width), 0.0) \
            + np.maximum((axis[0] + width) - axis, 0.0)
        return strength * (d / width) ** 2

    @property
    def time(self) -> float:
        return self.state.n * self.dt

    def _source(self, t: float) -> np.ndarray:
        if t < 0.0:
            return 0.0
        return -self.params.eps0 * self._g * np.exp(-1j * self.omega * t)

    def step(self) -> None:
        """Advance E, J from n to n+1 and H, K from n+1/2 to n+3/2."""
        p, g, st = self.params, self.grid, self.state
        dt, hx, hy = self.dt, g.h_x, g.h_y

        # E update centered at (n + 1/2): curl_h H - averaged J - J_s
        curl = np.zeros_like(st.E)
        curl[1:-1, :] += (st.Hy[1:, :] - st.Hy[:-1, :]) / hx
        curl[:, 1:-1] -= (st.Hx[:, 1:] - st.Hx[:, :-1]) / hy
        rhs = curl - st.J - self._source((st.n + 0.5) * dt)
        aE, bE = self._ade_e
        E_new = aE * st.E + bE * (dt / p.eps0) * rhs
        if self._sigma is not None:
            E_new *= np.exp(-self._sigma * dt)
        if not self.vacuum:
            st.J += (dt * p.eps0 * p.omega_e ** 2 * 0.5
                     * (E_new + st.E)) * self._jmask
            st.J *= self._jmask
        self._h_prev = (st.Hx.copy(), st.Hy.copy())
        self._k_prev = (st.Kx.copy(), st.Ky.copy())
        st.E = E_new

        # H update centered at (n + 1): -curl_h E - averaged K
        aH, bH = self._ade_h
        curlx = (st.E[:, 1:] - st.E[:, :-1]) / hy
        Hx_new = aH * st.Hx - bH * (dt / p.mu0) * (curlx + st.Kx)
        curly = -(st.E[1:, :] - st.E[:-1, :]) / hx
        Hy_new = aH * st.Hy - bH * (dt / p.mu0) * (curly + st.Ky)
        if self._sigma is not None:
            Hx_new *= np.exp(-0.5 * (self._sigma[:, 1:] + self._sigma[:, :-1]) * dt)
            Hy_new *= np.exp(-0.5 * (self._sigma[1:, :] + self._sigma[:-1, :]) * dt)
        if not self.vacuum:
            st.Kx += (dt * p.mu0 * p.omega_m ** 2 * 0.5
                      * (Hx_new + st.Hx)) * self._kxmask
            st.Kx *= self._kxmask
            st.Ky += (dt * p.mu0 * p.omega_m ** 2 * 0.5
                      * (Hy_new + st.Hy)) * self._kymask
            st.Ky *= self._kymask
        st.Hx, st.Hy = Hx_new, Hy_new
        st.n += 1

    def field_state(self) -> FieldState:
        """Collocated snapshot at the current integer time.

        H and K are averaged over the two neighboring half steps and over
        the two staggered positions straddling each node, both second-order.
        """
        st = self.state
        U = FieldState(self.grid)
        U.data[0] = st.E.copy()
        hxp, hyp = self._h_prev if self._h_prev is not None else (st.Hx, st.Hy)
        Hx = 0.5 * (st.Hx + hxp)
        Hy = 0.5 * (st.Hy + hyp)
        U.data[1][:, 1:-1] = 0.5 * (Hx[:, 1:] + Hx[:, :-1])
        U.data[2][1:-1, :] = 0.5 * (Hy[1:, :] + Hy[:-1, :])
        U.data[3] = st.J.copy()
        U.data[4][:, 1:-1] = 0.5 * (st.Kx[:, 1:] + st.Kx[:, :-1])
        U.data[5][1:-1, :] = 0.5 * (st.Ky[1:, :] + st.Ky[:-1, :])
        i0 = self.grid.i0
        for c in (4, 5):
            U.data[c][:i0, :] = 0.0
        return U

    def divergence(self) -> Dict[str, float]:
        """Max |div_h| of H and K at cell centers (structurally ~0)."""
        st, g = self.state, self.grid
        dH = ((st.Hx[1:, :] - st.Hx[:-1, :]) / g.h_x
              + (st.Hy[:, 1:] - st.Hy[:, :-1]) / g.h_y)
        dK = ((st.Kx[1:, :] - st.Kx[:-1, :]) / g.h_x
              + (st.Ky[:, 1:] - st.Ky[:, :-1]) / g.h_y)
        i0 = g.i0
        scale = max(float(np.max(np.abs(st.Hx))), float(np.max(np.abs(st.Hy))),
                    1e-300)
        return {"div_H": float(np.max(np.abs(dH))) / scale,
                "div_K": float(np.max(np.abs(dK[i0 + 1:, :]))) / scale,
                "scale": scale}

    def energy(self) -> float:
        """Discrete field energy (E-H part; exact invariant in vacuum)."""
        p, g, st = self.params, self.grid, self.state
        cell = g.h_x * g.h_y
        e = 0.5 * p.eps0 * np.sum(np.abs(st.E) ** 2)
        e += 0.5 * p.mu0 * (np.sum(np.abs(st.Hx) ** 2)
                            + np.sum(np.abs(st.Hy) ** 2))
        if not self.vacuum:
            e += 0.5 / (p.eps0 * p.omega_e ** 2) * np.sum(np.abs(st.J) ** 2)
            e += 0.5 / (p.mu0 * p.omega_m ** 2) * (
                np.sum(np.abs(st.Kx) ** 2) + np.sum(np.abs(st.Ky) ** 2))
        return float(e) * cell


def run(params: MediumParams, grid: Grid2, omega: float,
        times: Sequence[float], s: float = 1.0, source_width: float = 1.5,
        source_center: Tuple[float, float] = (0.0, 0.0),
        cfl_frac: float = 0.9, dt: Optional[float] = None,
        probe_point: Optional[Tuple[float, float]] = None,
        probe_component: int = 0,
        probe_times: Optional[Sequence[float]] = None,
        sponge: bool = False):
    """March the solver and sample the same trace schedule as the spectral run."""
    from .evolution import EvolutionTrace

    times = np.asarray(times, dtype=float)
    if dt is None:
        # shrink dt so the finest sample spacing is an integer step count
        all_t = np.asarray(list(times)
                           + (list(probe_times) if probe_times is not None
                              else []), dtype=float)
        pos = np.diff(np.unique(np.concatenate([[0.0], all_t])))
        base = float(np.min(pos[pos > 1e-12])) if np.any(pos > 1e-12) else 1.0
        h = min(grid.h_x, grid.h_y)
        dt0 = cfl_frac * h / (params.c * math.sqrt(2.0))
        dt = base / math.ceil(base / dt0)
    solver = YeeSolver(params, grid, omega, source_width, source_center,
                       cfl_frac=cfl_frac, dt=dt, sponge=sponge)
    sample = {int(round(t / solver.dt)) for t in times}
    p_idx = {}
    pt = pv = None
    if probe_point is not None:
        pt = np.asarray(probe_times if probe_times is not None else times,
                        dtype=float)
        pv = np.zeros(pt.size, complex)
        ix = int(np.argmin(np.abs(grid.x - probe_point[0])))
        iy = int(np.argmin(np.abs(grid.y - probe_point[1])))
        for i, t in enumerate(pt):
            p_idx.setdefault(int(round(t / solver.dt)), []).append(i)
    n_end = max(max(sample), max(p_idx) if p_idx else 0)
    weight = WeightParams(s)
    fields, norm_h, norm_w, div_h, div_k = [], [], [], [], []

    def collect() -> None:
        n = solver.state.n
        if n in sample:
            U = solver.field_state()
            fields.append(U)
            norm_h.append(norm_H(params, U))
            norm_w.append(norm_weighted(params, U, weight, sign=-1))
            d = solver.divergence()
            div_h.append(d["div_H"])
            div_k.append(d["div_K"])
        if n in p_idx:
            for i in p_idx[n]:
                pv[i] = solver.state.E[ix, iy] if probe_component == 0 \
                    else solver.field_state().data[probe_component][ix, iy]

    collect()
    for _ in range(n_end):
        solver.step()
        collect()
    return EvolutionTrace(
        times=times, fields=fields, norm_h=np.array(norm_h),
        norm_w=np.array(norm_w), gap=None, omega=omega, s=s,
        probe_point=probe_point, probe_component=probe_component,
        probe_times=pt, probe_values=pv,
        diagnostics={"dt": solver.dt, "steps": float(n_end),
                     "max_div_H": max(div_h) if div_h else 0.0,
                     "max_div_K": max(div_k) if div_k else 0.0})
