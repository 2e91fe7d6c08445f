"""Two-source extraction by ``(x, y) -> 1_A(xy)`` over flat sources.

Entropy here is normalized min-entropy: ``min_s log(1/P(s)) / log |S|``,
the minimum taken over points of positive probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .discrepancy import count_pairs
from .groups import SubsetMask, as_rng, same_group
from .search import worst_pair_search
from .tolerances import TOL


@dataclass(frozen=True)
class FiniteDistribution:
    probabilities: tuple

    def __post_init__(self):
        ps = self.probabilities
        if any(p < 0 for p in ps):
            raise ValueError("probabilities must be nonnegative")
        total = sum(ps)
        if all(isinstance(p, (int, Fraction)) for p in ps):
            if total != 1:
                raise ValueError(f"probabilities sum to {total}, not 1")
        elif abs(float(total) - 1.0) > TOL.distribution_sum:
            raise ValueError(f"probabilities sum to {float(total)}, not 1")

    @classmethod
    def of(cls, probabilities: Sequence) -> "FiniteDistribution":
        return cls(tuple(probabilities))

    @property
    def support_size(self) -> int:
        return len(self.probabilities)


@dataclass(frozen=True)
class FlatSource:
    support: SubsetMask

    def __post_init__(self):
        if self.support.cardinality == 0:
            raise ValueError("flat source needs a nonempty support")

    def distribution(self) -> FiniteDistribution:
        p = Fraction(1, self.support.cardinality)
        return FiniteDistribution.of([p if b else Fraction(0) for b in self.support.bits])

    @property
    def entropy(self) -> float:
        return math.log(self.support.cardinality) / math.log(self.support.group.size)


def min_entropy(dist: FiniteDistribution) -> float:
    n = dist.support_size
    if n < 2:
        raise ValueError("min-entropy undefined for a one-point range")
    pmax = max(dist.probabilities)
    if pmax == 1:
        return 0.0
    if isinstance(pmax, Fraction) and pmax == Fraction(1, n):
        return 1.0
    if isinstance(pmax, Fraction):
        return (math.log(pmax.denominator) - math.log(pmax.numerator)) / math.log(n)
    return -math.log(pmax) / math.log(n)


def output_distribution(A: SubsetMask, X: FlatSource, Y: FlatSource) -> FiniteDistribution:
    """Law of ``1_A(xy)`` for independent flat x ~ X, y ~ Y, as ``(P(0), P(1))``."""
    same_group(A, X.support, Y.support)
    p1 = Fraction(count_pairs(X.support, Y.support, A), X.support.cardinality * Y.support.cardinality)
    return FiniteDistribution.of([1 - p1, p1])


def bit_entropy(p1: Fraction) -> float:
    """Normalized min-entropy of a bit with ``P(1) = p1`` (log base 2)."""
    return min_entropy(FiniteDistribution.of([1 - p1, p1]))


def support_floor(N: int, entropy_floor: float) -> int:
    """Smallest k with ``log k / log N > entropy_floor``."""
    if not 0 < entropy_floor < 1:
        raise ValueError("entropy floor must lie in (0, 1)")
    for k in range(1, N + 1):
        if math.log(k) / math.log(N) > entropy_floor:
            return k
    raise ValueError("no support size clears the entropy floor")


@dataclass
class ExtractorCertificate:
    epsilon: float
    c: float
    verdict: bool
    worst_source_pair: tuple[FlatSource, FlatSource]
    worst_output_entropy: float
    mode: str
    k_min: int
    worst_deviation: Fraction
    evaluations: int

    @property
    def label(self) -> str:
        if self.mode == "exhaustive":
            return "exhaustive over flat sources"
        return "search over flat sources: verdict is an upper-bound claim only"

    def to_json(self) -> dict:
        X, Y = self.worst_source_pair
        return {
            "entropy_floor": self.epsilon,
            "c": self.c,
            "verdict": self.verdict,
            "worst_output_entropy": self.worst_output_entropy,
            "worst_deviation": str(self.worst_deviation),
            "worst_deviation_float": float(self.worst_deviation),
            "mode": self.mode,
            "label": self.label,
            "k_min": self.k_min,
            "evaluations": self.evaluations,
            "worst_X": X.support.to_json(),
            "worst_Y": Y.support.to_json(),
        }


def certify_extractor(
    A: SubsetMask,
    entropy_floor: float,
    c: float,
    mode: str = "exhaustive",
    budget: int = 10**8,
    seed=0,
) -> ExtractorCertificate:
    """Worst flat-source pair above the entropy floor and the verdict ``H_out > c``.

    Output entropy decreases in the deviation ``|P(1) - 1/2|``, so the worst
    pair is the one found by the adversarial pair search.
    """
    N = A.group.size
    k_min = support_floor(N, entropy_floor)
    out = worst_pair_search(A, k_min, k_min, method="exhaustive" if mode == "exhaustive" else "anneal",
                            budget=budget, seed=seed)
    X, Y = FlatSource(out.best_X), FlatSource(out.best_Y)
    p1 = output_distribution(A, X, Y).probabilities[1]
    H_out = bit_entropy(p1)
    return ExtractorCertificate(
        epsilon=entropy_floor,
        c=c,
        verdict=H_out > c,
        worst_source_pair=(X, Y),
        worst_output_entropy=H_out,
        mode=mode,
        k_min=k_min,
        worst_deviation=abs(p1 - Fraction(1, 2)),
        evaluations=out.evaluations,
    )


# ---------------------------------------------------------------------------
# von Neumann


def von_neumann(bits) -> int | None:
    """First bit of the first unequal pair (0,1), (2,3), ...; None if every pair is equal."""
    bits = list(bits)
    for m in range(0, len(bits) - 1, 2):
        if bits[m] != bits[m + 1]:
            return int(bits[m])
    return None


def _von_neumann_batch(streams: np.ndarray):
    pairs = streams[:, : streams.shape[1] // 2 * 2].reshape(streams.shape[0], -1, 2)
    unequal = pairs[:, :, 0] != pairs[:, :, 1]
    ok = unequal.any(axis=1)
    first = unequal.argmax(axis=1)
    return pairs[np.arange(streams.shape[0]), first, 0][ok]


def von_neumann_bias(q: float, trials: int, seed, length: int = 256) -> tuple[float, float]:
    """Empirical ``P(output = 1)`` over ``trials`` accepted outputs from Bernoulli(q) streams."""
    if not 0 < q < 1:
        raise ValueError("q must lie strictly between 0 and 1")
    rng = as_rng(seed)
    outs = []
    got = 0
    while got < trials:
        streams = (rng.random((min(trials, 1 << 16), length)) < q).astype(np.int8)
        o = _von_neumann_batch(streams)[: trials - got]
        outs.append(o)
        got += o.size
    y = np.concatenate(outs)
    p = float(y.mean())
    return p, math.sqrt(p * (1 - p) / y.size)
