"""Numeric tolerances shared by the floating-point code paths.

Every tolerance a test or check refers to lives in ``TOL``.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    parseval_rel: float = 1e-9
    inverse_abs: float = 1e-9
    gauss_modulus: float = 1e-9
    gauss_zero: float = 1e-12
    # relative slack when comparing an exact integer left side against a float bound
    bound_rel: float = 1e-9
    # |value - round(value)| above this means the float transform can't be trusted
    rounding_guard: float = 0.25
    distribution_sum: float = 1e-12
    mean_zero: float = 1e-12


TOL = Tolerances()
