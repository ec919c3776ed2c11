"""Two-media dispersive model: permittivities, spectral cuts, branched roots.

The x<0 half-plane is vacuum (constant eps0, mu0); the x>0 half-plane is a
Drude metamaterial with eps(lam) = eps0*(1 - omega_e**2/lam**2) and
mu(lam) = mu0*(1 - omega_m**2/lam**2). Both material functions are negative
at low frequency, which is the source of the plasmonic phenomena downstream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


class Side(enum.Enum):
    VACUUM = "vacuum"
    DRUDE = "drude"


class BranchRegime(enum.Enum):
    POSITIVE_REAL = "positive-real"
    NEGATIVE_IMAGINARY = "negative-imaginary"
    POSITIVE_IMAGINARY = "positive-imaginary"


@dataclass(frozen=True)
class MediumParams:
    """Physical parameters of the vacuum/Drude pair with derived constants."""

    eps0: float = 1.0
    mu0: float = 1.0
    omega_e: float = math.sqrt(2.0)
    omega_m: float = 1.0

    def __post_init__(self) -> None:
        for name in ("eps0", "mu0", "omega_e", "omega_m"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"MediumParams.{name} must be strictly positive")

    @property
    def omega_p(self) -> float:
        """Plasmonic frequency: horizontal asymptote of the dispersion curve."""
        return self.omega_m / math.sqrt(2.0)

    @property
    def omega_c(self) -> float:
        """Cross-point frequency where both square roots vanish together."""
        return self.omega_e * self.omega_m / math.sqrt(self.omega_e**2 + self.omega_m**2)

    @property
    def k_c(self) -> float:
        """Cross-point wavenumber, origin of the plasmonic curve."""
        return math.sqrt(self.eps0 * self.mu0) * self.omega_c

    @property
    def K(self) -> float:
        """Signed contrast eps0*mu0*(omega_m**2 - omega_e**2)."""
        return self.eps0 * self.mu0 * (self.omega_m**2 - self.omega_e**2)

    @property
    def is_critical(self) -> bool:
        # exact equality by design: the critical/non-critical dichotomy is
        # structural, so configs must set both from the same literal
        return self.omega_e == self.omega_m

    @property
    def c(self) -> float:
        """Vacuum wave speed."""
        return 1.0 / math.sqrt(self.eps0 * self.mu0)


@dataclass(frozen=True)
class BranchedRoot:
    """A branch-selected square root theta: real >= 0 or purely imaginary."""

    value: complex
    regime: BranchRegime


def _check_drude_lambda(lam: ArrayLike) -> None:
    if np.any(np.asarray(lam) == 0.0):
        raise ValueError("lambda = 0 is a pole of the Drude material functions")


def eps_lambda(params: MediumParams, lam: ArrayLike, side: Side) -> ArrayLike:
    """Permittivity at frequency lam on the requested side."""
    if side is Side.VACUUM:
        return params.eps0 * np.ones_like(np.asarray(lam, dtype=float)) if isinstance(lam, np.ndarray) else params.eps0
    _check_drude_lambda(lam)
    return params.eps0 * (1.0 - params.omega_e**2 / np.asarray(lam, dtype=float) ** 2) if isinstance(lam, np.ndarray) \
        else params.eps0 * (1.0 - params.omega_e**2 / lam**2)


def mu_lambda(params: MediumParams, lam: ArrayLike, side: Side) -> ArrayLike:
    """Permeability at frequency lam on the requested side."""
    if side is Side.VACUUM:
        return params.mu0 * np.ones_like(np.asarray(lam, dtype=float)) if isinstance(lam, np.ndarray) else params.mu0
    _check_drude_lambda(lam)
    return params.mu0 * (1.0 - params.omega_m**2 / np.asarray(lam, dtype=float) ** 2) if isinstance(lam, np.ndarray) \
        else params.mu0 * (1.0 - params.omega_m**2 / lam**2)


def big_theta(params: MediumParams, k: ArrayLike, lam: ArrayLike, side: Side) -> ArrayLike:
    """Theta(k, lam) = k**2 - eps*mu*lam**2 on the requested side (even in k, lam)."""
    eps = eps_lambda(params, lam, side)
    mu = mu_lambda(params, lam, side)
    return np.asarray(k) ** 2 - eps * mu * np.asarray(lam) ** 2 if isinstance(k, np.ndarray) or isinstance(lam, np.ndarray) \
        else k**2 - eps * mu * lam**2


# branch table, per zone and side:
#   theta-: -i*sgn(lam)*|Theta-|^{1/2} in DI, DE, DD; |Theta-|^{1/2} otherwise
#   theta+: +i*sgn(lam)*|Theta+|^{1/2} in EI, DI; -i*sgn(lam)*|Theta+|^{1/2} in DD;
#           |Theta+|^{1/2} otherwise
_VAC_NEG_IMAG = frozenset({"DI", "DE", "DD"})
_DRUDE_POS_IMAG = frozenset({"EI", "DI"})
_DRUDE_NEG_IMAG = frozenset({"DD"})


def theta_branch_value(params: MediumParams, k: ArrayLike, lam: ArrayLike,
                       zone_name: str, side: Side) -> ArrayLike:
    """Branch-selected square root of big_theta as a complex value (vectorized)."""
    th = np.sqrt(np.abs(big_theta(params, k, lam, side)))
    sgn = np.sign(lam)
    if side is Side.VACUUM:
        if zone_name in _VAC_NEG_IMAG:
            return -1j * sgn * th
        return th + 0j
    if zone_name in _DRUDE_POS_IMAG:
        return 1j * sgn * th
    if zone_name in _DRUDE_NEG_IMAG:
        return -1j * sgn * th
    return th + 0j


def theta_branch(params: MediumParams, k: float, lam: float, zone, side: Side) -> BranchedRoot:
    """Scalar branch-selected root with its regime tag."""
    zone_name = zone.name if hasattr(zone, "name") else str(zone)
    value = complex(theta_branch_value(params, k, lam, zone_name, side))
    if value.imag > 0:
        regime = BranchRegime.POSITIVE_IMAGINARY
    elif value.imag < 0:
        regime = BranchRegime.NEGATIVE_IMAGINARY
    else:
        regime = BranchRegime.POSITIVE_REAL
    return BranchedRoot(value=value, regime=regime)


@dataclass(frozen=True)
class CutFunctions:
    """Spectral cut values at a frequency; absent cuts are None."""

    k_0: float
    k_D: Optional[float]
    k_I: Optional[float]
    k_plus: complex


def cut_functions(params: MediumParams, lam: float) -> CutFunctions:
    """Spectral cuts k_0, k_D, k_I and the three-branch function k_plus."""
    if lam == 0.0:
        raise ValueError("cut functions are undefined at lambda = 0")
    al = abs(lam)
    k0 = math.sqrt(params.eps0 * params.mu0) * al
    lo = min(params.omega_e, params.omega_m)
    hi = max(params.omega_e, params.omega_m)
    epmp = eps_lambda(params, lam, Side.DRUDE) * mu_lambda(params, lam, Side.DRUDE)
    k_D = math.sqrt(epmp) * al if al >= hi else None
    k_I = math.sqrt(epmp) * al if al <= lo else None
    if al <= lo:
        k_plus: complex = complex(k_I)
    elif al >= hi:
        k_plus = complex(k_D)
    else:
        k_plus = 1j * math.sqrt(-epmp) * al
    return CutFunctions(k_0=k0, k_D=k_D, k_I=k_I, k_plus=k_plus)
