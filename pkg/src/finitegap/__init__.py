"""Finite-gap Schrodinger operators from hyperelliptic curves.

Periods, theta and Kleinian sigma functions, the Its-Matveev potential,
Bloch functions, averages, quasi-momentum and Wannier functions.
"""
from .curve import Curve, SurfacePoint, curve_from_branch_points, point
from .errors import ComputeError, ConfigError, FiniteGapError
from .periods import PeriodData, compute_periods
from .sigma import sigma, sigma_context, wp, zeta
from .spectral import average_S, make_potential, potential_u
from .wannier import moments, wannier_asymptotic, wannier_direct, wannier_series, wannier_support

__version__ = "0.1.0"

__all__ = [
    "ComputeError",
    "ConfigError",
    "Curve",
    "FiniteGapError",
    "PeriodData",
    "SurfacePoint",
    "average_S",
    "compute_periods",
    "curve_from_branch_points",
    "make_potential",
    "moments",
    "point",
    "potential_u",
    "sigma",
    "sigma_context",
    "wannier_asymptotic",
    "wannier_direct",
    "wannier_series",
    "wannier_support",
    "wp",
    "zeta",
]
