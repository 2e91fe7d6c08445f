"""Pair counting, the representation function and convolution energy.

Counts are over ordered pairs ``(x, y)`` in ``X x Y``.  ``r(z)`` is the
number of such pairs with ``xy = z``; in the averaged convolution
convention ``1_X * 1_Y(z) = r(z) / N`` and ``||1_X * 1_Y||_2^2 = E / N^3``
where ``E = sum_z r(z)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import fourier
from .groups import Group, SubsetMask, as_rng, same_group


@dataclass(frozen=True, eq=False)
class RepCounts:
    group: Group
    counts: np.ndarray
    pair_total: int

    def count_in(self, A: SubsetMask) -> int:
        """Pairs landing in ``A``: ``sum_{z in A} r(z)``."""
        if A.group != self.group:
            raise ValueError("mask and representation counts live in different groups")
        return int(self.counts[A.bits].sum())

    @property
    def energy(self) -> int:
        return int(np.dot(self.counts, self.counts))


@dataclass(frozen=True)
class DiscrepancyReport:
    pair_count: int
    pair_total: int
    normalized_inner: Fraction
    epsilon_extracted_at: float
    energy_count: int

    def to_json(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "pair_total": self.pair_total,
            "normalized_inner": str(self.normalized_inner),
            "normalized_inner_float": float(self.normalized_inner),
            "epsilon_extracted_at": self.epsilon_extracted_at,
            "energy_count": self.energy_count,
        }


def _products(X: SubsetMask, Y: SubsetMask) -> np.ndarray:
    g = X.group
    return g.op(X.elements[:, None], Y.elements[None, :])


def rep_counts(X: SubsetMask, Y: SubsetMask) -> RepCounts:
    group = same_group(X, Y)
    counts = np.bincount(_products(X, Y).ravel(), minlength=group.size).astype(np.int64)
    counts.setflags(write=False)
    return RepCounts(group, counts, X.cardinality * Y.cardinality)


def count_pairs(X: SubsetMask, Y: SubsetMask, A: SubsetMask, rep: RepCounts | None = None) -> int:
    """Number of ``(x, y)`` in ``X x Y`` with ``xy`` in ``A``."""
    same_group(X, Y, A)
    if rep is not None:
        return rep.count_in(A)
    return int(A.bits[_products(X, Y)].sum())


def energy(X: SubsetMask, Y: SubsetMask, cross_check: bool = True) -> int:
    """``E(X, Y) = sum_z r(z)^2``, the number of quadruples with ``x1 y1 = x2 y2``.

    On Z/N and F_2^n the value is also computed through the transform and the
    two must agree exactly.
    """
    direct = rep_counts(X, Y).energy
    if cross_check and X.group.is_abelian_structured:
        try:
            fast = fourier.fast_energy(X, Y)
        except fourier.NumericInstabilityError:
            return direct
        if fast != direct:
            raise ArithmeticError(f"energy mismatch: direct {direct}, transform {fast}")
    return direct


def pair_fraction(X: SubsetMask, Y: SubsetMask, A: SubsetMask) -> Fraction:
    if X.cardinality == 0 or Y.cardinality == 0:
        raise ValueError("X and Y must be nonempty")
    return Fraction(count_pairs(X, Y, A), X.cardinality * Y.cardinality)


def epsilon_deviation(X: SubsetMask, Y: SubsetMask, A: SubsetMask) -> float:
    """``|count / (|X||Y|) - 1/2|``; the pair is eps-extracted iff this is <= eps."""
    return float(abs(pair_fraction(X, Y, A) - Fraction(1, 2)))


def exact_deviation(X: SubsetMask, Y: SubsetMask, A: SubsetMask) -> Fraction:
    return abs(pair_fraction(X, Y, A) - Fraction(1, 2))


def is_epsilon_extracted(X: SubsetMask, Y: SubsetMask, A: SubsetMask, eps: float) -> bool:
    return exact_deviation(X, Y, A) <= Fraction(eps)


def discrepancy_report(X: SubsetMask, Y: SubsetMask, A: SubsetMask) -> DiscrepancyReport:
    if X.cardinality == 0 or Y.cardinality == 0:
        raise ValueError("X and Y must be nonempty")
    rep = rep_counts(X, Y)
    count = count_pairs(X, Y, A)
    if count != rep.count_in(A):
        raise ArithmeticError("pair count disagrees with representation counts")
    total = rep.pair_total
    inner = Fraction(2 * count - total, total)
    return DiscrepancyReport(
        pair_count=count,
        pair_total=total,
        normalized_inner=inner,
        epsilon_extracted_at=float(abs(inner) / 2),
        energy_count=energy(X, Y),
    )


# ---------------------------------------------------------------------------
# Erdos-Renyi control


def sample_er_adjacency(n: int, seed) -> np.ndarray:
    """Symmetric boolean adjacency of G(n, 1/2) without loops."""
    rng = as_rng(seed)
    upper = np.triu(rng.integers(0, 2, size=(n, n), dtype=np.uint8).astype(bool), k=1)
    return upper | upper.T


def er_bipartite_deviation(n: int, seed, X, Y) -> float:
    """Edge-density deviation from 1/2 between ``X`` and ``Y`` in a G(n, 1/2) sample.

    Ordered pairs ``(x, y)`` with ``x != y`` are counted, so the denominator
    is ``|X||Y| - |X & Y|``.
    """
    xs = np.unique(np.asarray(X.elements if isinstance(X, SubsetMask) else X, dtype=np.int64))
    ys = np.unique(np.asarray(Y.elements if isinstance(Y, SubsetMask) else Y, dtype=np.int64))
    if xs.size == 0 or ys.size == 0:
        raise ValueError("X and Y must be nonempty")
    if xs.min() < 0 or ys.min() < 0 or max(xs.max(), ys.max()) >= n:
        raise ValueError("vertex index out of range")
    admissible = xs.size * ys.size - np.intersect1d(xs, ys).size
    if admissible == 0:
        raise ValueError("no admissible pairs: X and Y are the same single vertex")
    adj = sample_er_adjacency(n, seed)
    edges = int(adj[np.ix_(xs, ys)].sum())
    return float(abs(Fraction(edges, admissible) - Fraction(1, 2)))


def er_envelope(x_size: int, y_size: int, sigmas: float = 5.0) -> float:
    """``sigmas`` binomial standard deviations of an edge fraction: ``sigmas / (2 sqrt(|X||Y|))``."""
    return sigmas / (2.0 * np.sqrt(x_size * y_size))

