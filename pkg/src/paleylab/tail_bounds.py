"""Probability-bound certificates: Hoeffding, binomial tails, union bound.

Logs are natural.  Exact binomial tails are Fractions over big integers;
floats appear only at the final comparison, which is done conservatively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import mpmath
import numpy as np

from .groups import as_rng

HOEFFDING_CONVENTION = "suppressed constant in P(|sum| >= lambda*sigma) <~ exp(-lambda^2/2) taken as 1"


def exact_decimal(x: float) -> Fraction:
    """The decimal a float was written as (0.1 -> 1/10), not its binary expansion."""
    return Fraction(repr(float(x)))


def upper_threshold(n: int, eps: float) -> int:
    """``ceil((1/2 + eps) n)``."""
    return math.ceil((Fraction(1, 2) + exact_decimal(eps)) * n)


@dataclass(frozen=True)
class TailCertificate:
    kind: str
    inputs: dict
    log_bound: float
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.log_bound):
            raise ValueError("certificate log bound must be finite")

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    def to_json(self) -> dict:
        return {"kind": self.kind, "inputs": self.inputs, "log_bound": self.log_bound, **self.details}


def h(x: float) -> float:
    """``(1/2 + x) log(1 + 2x) + (1/2 - x) log(1 - 2x)`` on ``[0, 1/2)``."""
    if not 0 <= x < 0.5:
        raise ValueError("h is defined on [0, 1/2)")
    return (0.5 + x) * math.log1p(2 * x) + (0.5 - x) * math.log1p(-2 * x)


def _h_mp(x: Fraction):
    x = mpmath.mpf(x.numerator) / x.denominator
    return (mpmath.mpf(1) / 2 + x) * mpmath.log(1 + 2 * x) + (mpmath.mpf(1) / 2 - x) * mpmath.log(1 - 2 * x)


def binomial_tail_exact(n: int, threshold: int) -> Fraction:
    """``P(Z >= threshold)`` for ``Z ~ B(n, 1/2)``, exactly."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    lo = max(threshold, 0)
    if lo > n:
        return Fraction(0)
    return Fraction(sum(math.comb(n, j) for j in range(lo, n + 1)), 1 << n)


def binomial_pmf_exact(n: int, j: int) -> Fraction:
    if not 0 <= j <= n:
        return Fraction(0)
    return Fraction(math.comb(n, j), 1 << n)


def _log_fraction(q: Fraction) -> float:
    return math.log(q.numerator) - math.log(q.denominator)


def tail_below_rate_bound(tail: Fraction, n: int, eps: float) -> bool:
    """Is ``tail <= exp(-n h(eps))``?  Decided with a safety margin, else in high precision."""
    if tail == 0:
        return True
    lhs = _log_fraction(tail)
    rhs = -n * h(float(exact_decimal(eps)))
    margin = 1e-11 * (1 + n)
    if lhs <= rhs - margin:
        return True
    if lhs > rhs + margin:
        return False
    with mpmath.workdps(80):
        lhs_mp = mpmath.log(tail.numerator) - mpmath.log(tail.denominator)
        rhs_mp = -n * _h_mp(exact_decimal(eps))
        return bool(lhs_mp <= rhs_mp)


@dataclass(frozen=True)
class BinomialCheck:
    n: int
    epsilon: float
    threshold: int
    exact: Fraction
    upper: float
    lower_slack: float | None
    upper_holds: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "epsilon": self.epsilon,
            "threshold": self.threshold,
            "exact_tail": str(self.exact),
            "exact_tail_float": float(self.exact),
            "log_exact_tail": _log_fraction(self.exact) if self.exact else None,
            "upper_bound": self.upper,
            "log_upper_bound": -self.n * h(self.epsilon),
            "lower_slack": self.lower_slack,
            "upper_holds": self.upper_holds,
        }


def _lower_slack(tail: Fraction, n: int, eps: float) -> float | None:
    if n < 2 or tail == 0:
        return None
    return (-_log_fraction(tail) - n * h(eps)) / math.log(n)


def _check(n: int, eps: float, threshold: int, tail: Fraction) -> BinomialCheck:
    return BinomialCheck(
        n=n,
        epsilon=eps,
        threshold=threshold,
        exact=tail,
        upper=math.exp(-n * h(eps)),
        lower_slack=_lower_slack(tail, n, eps),
        upper_holds=tail_below_rate_bound(tail, n, eps),
    )


def binomial_bounds_check(n: int, epsilon: float) -> BinomialCheck:
    """Exact tail at ``ceil((1/2+eps) n)`` against ``exp(-n h(eps))``.

    ``lower_slack = (-log tail - n h(eps)) / log n`` measures the hidden
    logarithmic term of the matching lower bound.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if n < 1:
        raise ValueError("n must be >= 1")
    k = upper_threshold(n, epsilon)
    return _check(n, epsilon, k, binomial_tail_exact(n, k))


def tail_sweep(epsilon: float, n_max: int) -> Iterator[BinomialCheck]:
    """``binomial_bounds_check(n, epsilon)`` for n = 1..n_max, built incrementally.

    Uses ``T(n+1, k) = 2 T(n, k) + C(n, k-1)`` and
    ``T(n+1, k+1) = T(n+1, k) - C(n+1, k)`` on numerators ``T(n, k) = sum_{j>=k} C(n, j)``.
    """
    if not 0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    n, k = 1, upper_threshold(1, epsilon)
    tail = sum(math.comb(1, j) for j in range(k, 2))
    b = math.comb(1, k - 1)  # C(n, k-1), updated by exact ratios
    while True:
        yield _check(n, epsilon, k, Fraction(tail, 1 << n))
        if n >= n_max:
            return
        tail = 2 * tail + b
        n += 1
        b = b * n // (n - k + 1)
        k_next = upper_threshold(n, epsilon)
        while k < k_next:
            b = b * (n - k + 1) // k
            tail -= b
            k += 1


@dataclass(frozen=True)
class SweepSummary:
    epsilon: float
    n_max: int
    violations: int
    max_lower_slack: float
    argmax_n: int
    final_lower_slack: float

    def to_json(self) -> dict:
        return self.__dict__.copy()


def sweep_summary(epsilon: float, n_max: int, records: list[BinomialCheck] | None = None) -> SweepSummary:
    recs = list(tail_sweep(epsilon, n_max)) if records is None else records
    slacks = [(r.lower_slack, r.n) for r in recs if r.lower_slack is not None]
    best = max(slacks)
    return SweepSummary(
        epsilon=epsilon,
        n_max=n_max,
        violations=sum(not r.upper_holds for r in recs),
        max_lower_slack=best[0],
        argmax_n=best[1],
        final_lower_slack=slacks[-1][0],
    )


def binomial_certificate(n: int, epsilon: float, exact: bool = True) -> TailCertificate:
    k = upper_threshold(n, epsilon)
    inputs = {"n": n, "epsilon": epsilon, "threshold": k}
    if not exact:
        return TailCertificate("binomial_upper", inputs, -n * h(epsilon))
    tail = binomial_tail_exact(n, k)
    if tail == 0:
        raise ValueError("tail is zero; no finite log bound")
    return TailCertificate("binomial_exact", inputs, _log_fraction(tail), {"exact_tail": str(tail)})


# ---------------------------------------------------------------------------
# Hoeffding and the union bound


def hoeffding_bound(sup_norms, lam: float) -> TailCertificate:
    """``P(|sum X_i| >= lam sqrt(sum ||X_i||_inf^2)) <= exp(-lam^2 / 2)``."""
    norms = np.asarray(sup_norms, dtype=float)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    if np.any(norms < 0):
        raise ValueError("sup norms must be nonnegative")
    threshold = lam * math.sqrt(float(np.sum(norms**2)))
    return TailCertificate(
        "hoeffding",
        {"lambda": lam, "n_summands": int(norms.size), "sum_sq_sup_norms": float(np.sum(norms**2))},
        -(lam**2) / 2,
        {"deviation_threshold": threshold, "convention": HOEFFDING_CONVENTION},
    )


def hoeffding_monte_carlo(n: int, lam: float, trials: int, seed) -> dict:
    """Empirical ``P(|sum of n fair signs| >= lam sqrt(n))`` next to the certificate."""
    rng = as_rng(seed)
    sums = 2 * rng.binomial(n, 0.5, size=trials) - n
    freq = float(np.mean(np.abs(sums) >= lam * math.sqrt(n)))
    cert = hoeffding_bound(np.ones(n), lam)
    return {
        "n": n,
        "lambda": lam,
        "trials": trials,
        "empirical": freq,
        "certificate": cert.bound,
        "ratio": freq / cert.bound,
    }


def main_union_bound(N: int, epsilon: float, T_size: int, energy_ratio: float) -> TailCertificate:
    """Union-bound arithmetic for one (|S|, |T|) size class.

    Per pair the tail is ``exp(-eps^2 ratio / 2)``; at most ``N^{2|T|}``
    pairs contribute, so the class total is ``2|T| log N - eps^2 ratio / 2``
    in log form.  The certificate applies when ``ratio >= 6 |T| log N / eps^2``.
    """
    if N <= 1 or epsilon <= 0 or T_size <= 0 or energy_ratio <= 0:
        raise ValueError("main_union_bound needs positive inputs and N > 1")
    logn = math.log(N)
    per_pair = -(epsilon**2) * energy_ratio / 2
    threshold = 6 * T_size * logn / epsilon**2
    applicable = energy_ratio >= threshold * (1 - 1e-12)
    return TailCertificate(
        "union_bound",
        {"N": N, "epsilon": epsilon, "T_size": T_size, "energy_ratio": energy_ratio},
        2 * T_size * logn + per_pair,
        {
            "per_pair_log_bound": per_pair,
            "count_log": 2 * T_size * logn,
            "ratio_threshold": threshold,
            "applicable": applicable,
            "guaranteed_log_bound": -T_size * logn if applicable else None,
        },
    )
