"""Spectral-plane geometry: zones, sections, and the plasmonic curve.

Zone naming follows the propagative(D)/evanescent(E) regime on the vacuum
side then the Drude side: e.g. DE means propagative in vacuum, evanescent in
the Drude half-plane. EE is the one-dimensional plasmonic curve (or the two
lines lam = +-Omega_p for |k| > k_c in the critical case).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .medium import MediumParams, Side, big_theta, cut_functions

DEFAULT_TOL_INV = 1e-12
DEFAULT_TOL_CURVE = 1e-12
_BOUNDARY_RTOL = 1e-12


class ZoneLabel(enum.Enum):
    DD = "DD"
    DI = "DI"
    EI = "EI"
    DE = "DE"
    EE = "EE"
    OUTSIDE = "OUTSIDE"
    BOUNDARY = "BOUNDARY"


@dataclass(frozen=True)
class Section:
    """Horizontal section of a zone at fixed frequency."""

    zone: ZoneLabel
    lam: float
    intervals: Tuple[Tuple[float, float], ...] = ()
    points: Tuple[float, ...] = ()  # discrete k values (EE only)


def _stable_sqrt1p_minus1(eps: float) -> float:
    """sqrt(1+eps) - 1 without cancellation for small eps."""
    return eps / (1.0 + math.sqrt(1.0 + eps))


def lambda_E(params: MediumParams, k: float) -> float:
    """Frequency of the plasmonic guided mode at wavenumber |k| >= k_c."""
    ak = abs(k)
    if ak < params.k_c:
        raise ValueError("no plasmonic solution for |k| < k_c")
    if params.is_critical:
        return params.omega_p
    K = params.K
    # lam_E^2 = Om^2*(1/2 + k^2/K - sgn(K)*sqrt(1/4 + k^4/K^2)); evaluated in
    # the cancellation-free form 1/2 - sgn(K)*t*(sqrt(1+eps)-1) with t=k^2/|K|
    t = ak * ak / abs(K)
    eps = 1.0 / (4.0 * t * t)
    core = 0.5 - math.copysign(1.0, K) * t * _stable_sqrt1p_minus1(eps)
    return params.omega_m * math.sqrt(core)


def lambda_E_prime(params: MediumParams, k: float) -> float:
    """Closed-form derivative of lambda_E, stable for large |k|."""
    ak = abs(k)
    if params.is_critical:
        return 0.0
    K = params.K
    eps = K * K / (4.0 * ak**4)
    sq = math.sqrt(1.0 + eps)
    # 1 - (1+eps)^{-1/2} = eps / (sqrt(1+eps)*(1+sqrt(1+eps))), cancellation-free
    g = params.omega_m**2 * (ak / K) * eps / (sq * (1.0 + sq))
    d = g / lambda_E(params, ak)
    return d if k >= 0 else -d


def k_E(params: MediumParams, lam: float, tol_inv: float = DEFAULT_TOL_INV) -> float:
    """Positive wavenumber on the plasmonic curve at frequency lam (band interior)."""
    if params.is_critical:
        raise ValueError("k_E is not defined in the critical case (flat curve)")
    al = abs(lam)
    lo = min(params.omega_p, params.omega_c)
    hi = max(params.omega_p, params.omega_c)
    if not (lo < al < hi):
        raise ValueError("frequency outside the open plasmonic band")
    d = abs(al - params.omega_p)
    # bracket: curve starts at k_c and follows k ~ sqrt(Om_p*|K|/8)/sqrt(d)
    a = params.k_c
    b = 4.0 * max(params.k_c, math.sqrt(params.omega_p * abs(params.K) / 8.0) / math.sqrt(d))
    f = lambda kk: lambda_E(params, kk) - al
    while f(a) * f(b) > 0.0:
        b *= 2.0
    k = float(brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    # Newton polish with the closed-form derivative for the round-trip tolerance
    for _ in range(3):
        r = f(k)
        fp = lambda_E_prime(params, k)
        if r == 0.0 or fp == 0.0:
            break
        k -= r / fp
    if abs(f(k)) > tol_inv * max(1.0, al):
        raise RuntimeError("k_E inversion failed to reach the round-trip tolerance")
    return k


def jacobian_E(params: MediumParams, lam: float) -> float:
    """Jacobian |k_E'(lam)| of the curve parameterization, via the closed form."""
    k = k_E(params, lam)
    return 1.0 / abs(lambda_E_prime(params, k))


def classify(params: MediumParams, k: float, lam: float,
             tol_curve: float = DEFAULT_TOL_CURVE) -> ZoneLabel:
    """Zone of a point (k, lam); cuts and excluded lines map to BOUNDARY."""
    al, ak = abs(lam), abs(k)
    if al == 0.0 or al == params.omega_e or al == params.omega_m:
        return ZoneLabel.BOUNDARY
    th_m = big_theta(params, k, lam, Side.VACUUM)
    th_p = big_theta(params, k, lam, Side.DRUDE)
    scale = max(1.0, ak * ak, params.eps0 * params.mu0 * al * al)
    if abs(th_m) <= _BOUNDARY_RTOL * scale or abs(th_p) <= _BOUNDARY_RTOL * scale:
        return ZoneLabel.BOUNDARY
    vac_prop = th_m < 0.0
    dru_prop = th_p < 0.0
    if vac_prop and dru_prop:
        return ZoneLabel.DD if al > max(params.omega_e, params.omega_m) else ZoneLabel.DI
    if vac_prop and not dru_prop:
        return ZoneLabel.DE
    if not vac_prop and dru_prop:
        return ZoneLabel.EI
    # both evanescent: plasmonic curve or outside
    if params.is_critical:
        if ak > params.k_c and abs(al - params.omega_p) <= tol_curve * max(1.0, al):
            return ZoneLabel.EE
        return ZoneLabel.OUTSIDE
    if ak > params.k_c:
        if abs(al - lambda_E(params, ak)) <= tol_curve * max(1.0, al):
            return ZoneLabel.EE
    return ZoneLabel.OUTSIDE


def section(params: MediumParams, zone: ZoneLabel, lam: float) -> Section:
    """Horizontal section of a zone at frequency lam (intervals or points in k)."""
    al = abs(lam)
    if al == 0.0 or al == params.omega_m:
        raise ValueError("section is undefined at lambda in {0, +-omega_m}")
    lo = min(params.omega_e, params.omega_m)
    hi = max(params.omega_e, params.omega_m)
    cuts = cut_functions(params, lam)
    k0 = cuts.k_0

    if zone is ZoneLabel.DD:
        if al > hi:
            return Section(zone, lam, intervals=((-cuts.k_D, cuts.k_D),))
        return Section(zone, lam)
    if zone is ZoneLabel.DI:
        if 0.0 < al < lo:
            m = min(k0, cuts.k_I)
            return Section(zone, lam, intervals=((-m, m),))
        return Section(zone, lam)
    if zone is ZoneLabel.EI:
        if 0.0 < al < lo and k0 < cuts.k_I:
            return Section(zone, lam, intervals=((-cuts.k_I, -k0), (k0, cuts.k_I)))
        return Section(zone, lam)
    if zone is ZoneLabel.DE:
        if al > hi:
            return Section(zone, lam, intervals=((-k0, -cuts.k_D), (cuts.k_D, k0)))
        if lo < al < hi:
            return Section(zone, lam, intervals=((-k0, k0),))
        # below the band the Drude side may turn evanescent between k_I and k_0
        if cuts.k_I is not None and cuts.k_I < k0:
            return Section(zone, lam, intervals=((-k0, -cuts.k_I), (cuts.k_I, k0)))
        return Section(zone, lam)
    if zone is ZoneLabel.EE:
        if params.is_critical:
            raise ValueError("EE section is a half-line in the critical case; "
                             "handled by the eigenprojection path")
        blo = min(params.omega_p, params.omega_c)
        bhi = max(params.omega_p, params.omega_c)
        if blo < al < bhi:
            ke = k_E(params, lam)
            return Section(zone, lam, points=(-ke, ke))
        return Section(zone, lam)
    raise ValueError(f"no section for zone {zone}")


@dataclass(frozen=True)
class OmegaPAsymptotics:
    """Leading-order quantities of the curve near the plasmonic frequency."""

    k_E_asym: float
    J_E_asym: float
    kpp_asym: float
    theta_asym: float
    A_asym: float


def omega_p_asymptotics(params: MediumParams, lam: float) -> OmegaPAsymptotics:
    """Evaluate the five leading-order asymptotic laws at frequency lam.

    The curve approaches Omega_p from above when K < 0 and from below when
    K > 0; lam must sit on that side.
    """
    if params.is_critical:
        raise ValueError("asymptotics require the non-critical case")
    # K < 0 puts omega_p at the bottom of the band (approach from above);
    # K > 0 puts it at the top (approach from below)
    d = lam - params.omega_p
    if d == 0.0 or d * params.K >= 0.0:
        raise ValueError("lambda on the wrong side of omega_p for these parameters")
    ad = abs(d)
    C = math.sqrt(params.omega_p * abs(params.K) / 8.0)
    A_pref = math.sqrt(params.mu0) * params.omega_p / (2.0 * math.sqrt(2.0 * math.pi))
    return OmegaPAsymptotics(
        k_E_asym=C * ad**-0.5,
        J_E_asym=0.5 * C * ad**-1.5,
        kpp_asym=0.75 * C * ad**-2.5,
        theta_asym=C * ad**-0.5,
        A_asym=A_pref * C**-0.5 * ad**0.25,
    )
