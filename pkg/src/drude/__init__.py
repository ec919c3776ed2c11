"""Spectral toolkit for the TE Maxwell system at a vacuum/Drude interface.

Provides the frequency-dispersive two-media model, the plasmonic dispersion
curve, generalized eigenfunctions, the generalized Fourier transform, the
spectral density with singularity-aware quadrature, limiting absorption and
long-time evolution diagnostics, and an independent Yee/FDTD oracle.
"""

from .medium import MediumParams, BranchedRoot, Side, eps_lambda, mu_lambda, big_theta, theta_branch, cut_functions
from .geometry import ZoneLabel, Section, classify, lambda_E, k_E, jacobian_E, section, omega_p_asymptotics
from .quadrature import QuadConfig

__all__ = [
    "MediumParams", "BranchedRoot", "Side", "eps_lambda", "mu_lambda",
    "big_theta", "theta_branch", "cut_functions",
    "ZoneLabel", "Section", "classify", "lambda_E", "k_E", "jacobian_E",
    "section", "omega_p_asymptotics", "QuadConfig",
]

__version__ = "0.1.0"
