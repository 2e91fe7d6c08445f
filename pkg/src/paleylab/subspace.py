"""Subspaces of F_2^n: canonical bases, counting, dense-subspace search.

A vector is an n-bit integer; column c is bit c.  A basis is in reduced
echelon form when the pivot of each row is its lowest set bit, pivots
increase down the rows, and every pivot column is zero outside its own
row.  This form is unique for each subspace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterator

import numpy as np
from scipy.stats import binomtest

from .groups import BOOLEAN_CUBE, CYCLIC, Seed, SubsetMask, as_rng, make_group, random_subset_density_half
from .tail_bounds import binomial_pmf_exact, binomial_tail_exact, exact_decimal, h

DEFAULT_ENUM_BUDGET = 2_000_000
DEFAULT_PAIR_BUDGET = 4_000_000


class BudgetExceededError(ValueError):
    pass


@dataclass(frozen=True)
class SubspaceBasis:
    n: int
    rows: tuple[int, ...]
    pivots: tuple[int, ...] = field(compare=False)

    @property
    def k(self) -> int:
        return len(self.rows)

    def elements(self) -> np.ndarray:
        return span_batch(np.array([self.rows], dtype=np.int64).reshape(1, self.k))[0]

    def mask(self) -> SubsetMask:
        return SubsetMask.from_elements(make_group(BOOLEAN_CUBE, self.n), self.elements())

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "rows": list(self.rows), "pivots": list(self.pivots)}


def _lowbit(v: int) -> int:
    return (v & -v).bit_length() - 1


def canonical_basis(vectors, n: int) -> SubspaceBasis:
    """Reduced echelon basis of the span of ``vectors``; raises if they are dependent."""
    basis: list[int] = []
    for v in vectors:
        v = int(v)
        if v < 0 or v >> n:
            raise ValueError(f"vector {v} does not fit in {n} bits")
        for b in basis:
            if (v >> _lowbit(b)) & 1:
                v ^= b
        if v == 0:
            raise ValueError("vectors are linearly dependent")
        p = _lowbit(v)
        basis = [b ^ v if (b >> p) & 1 else b for b in basis]
        basis.append(v)
    basis.sort(key=_lowbit)
    return SubspaceBasis(n, tuple(basis), tuple(_lowbit(b) for b in basis))


def gf2_rank(vectors) -> int:
    basis: list[int] = []
    for v in vectors:
        v = int(v)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def span_batch(rows: np.ndarray) -> np.ndarray:
    """All 2^k XOR combinations of each row-set: (m, k) -> (m, 2^k)."""
    rows = np.asarray(rows, dtype=np.int64)
    elems = np.zeros((rows.shape[0], 1), dtype=np.int64)
    for j in range(rows.shape[1]):
        elems = np.concatenate([elems, elems ^ rows[:, j : j + 1]], axis=1)
    return elems


def gaussian_binomial(n: int, k: int, q: int = 2) -> int:
    if not 0 <= k <= n:
        return 0
    num, den = 1, 1
    for i in range(k):
        num *= q**n - q**i
        den *= q**k - q**i
    return num // den


def enumerate_subspaces(n: int, k: int, budget: int = DEFAULT_ENUM_BUDGET) -> Iterator[SubspaceBasis]:
    """Every k-dimensional subspace once, ordered by pivot tuple then free bits."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    total = gaussian_binomial(n, k)
    if total > budget:
        raise BudgetExceededError(f"{total} subspaces exceed the budget {budget}; use sampled mode")
    return _enumerate(n, k)


def _enumerate(n: int, k: int) -> Iterator[SubspaceBasis]:
    for pivots in combinations(range(n), k):
        pset = set(pivots)
        free = [[c for c in range(p + 1, n) if c not in pset] for p in pivots]
        nfree = sum(len(f) for f in free)
        for m in range(1 << nfree):
            rows = []
            for p, cols in zip(pivots, free):
                v = 1 << p
                for c in cols:
                    if m & 1:
                        v |= 1 << c
                    m >>= 1
                rows.append(v)
            yield SubspaceBasis(n, tuple(rows), pivots)


def count_Ik(n: int, k: int) -> tuple[int, int]:
    """(number of k-subspaces, lower bound 2^(nk - k^2))."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    exact = gaussian_binomial(n, k)
    lower = 1 << (n * k - k * k)
    assert exact >= lower
    return exact, lower


def jkl_formula(n: int, k: int, l: int) -> int:
    """Ordered pairs (V, W) of k-subspaces with dim(V & W) = l."""
    if not 0 <= l <= k <= n:
        return 0
    return (
        gaussian_binomial(n, k)
        * gaussian_binomial(k, l)
        * 2 ** ((k - l) ** 2)
        * gaussian_binomial(n - k, k - l)
    )


def _element_words(bases: list[SubspaceBasis], n: int) -> np.ndarray:
    """Element indicator of each subspace packed into uint64 words."""
    words = max(1, (1 << n) // 64)
    out = np.zeros((len(bases), words), dtype=np.uint64)
    if not bases:
        return out
    k = bases[0].k
    el = span_batch(np.array([b.rows for b in bases], dtype=np.int64).reshape(len(bases), k))
    rows = np.repeat(np.arange(len(bases)), el.shape[1])
    flat = el.ravel()
    np.bitwise_or.at(out, (rows, flat // 64), (np.uint64(1) << (flat % 64).astype(np.uint64)))
    return out


@lru_cache(maxsize=64)
def intersection_profile(n: int, k: int, budget: int = DEFAULT_PAIR_BUDGET) -> tuple[int, ...]:
    """``J_k^(l)`` for l = 0..k by pairwise intersection of all k-subspaces."""
    total = gaussian_binomial(n, k)
    if total * total > budget:
        raise BudgetExceededError(f"{total}^2 subspace pairs exceed the budget {budget}")
    bases = list(_enumerate(n, k))
    words = _element_words(bases, n)
    profile = np.zeros(k + 1, dtype=np.int64)
    step = max(1, 200_000 // max(1, len(bases)))
    for i0 in range(0, len(bases), step):
        block = words[i0 : i0 + step]
        inter = np.bitwise_count(block[:, None, :] & words[None, :, :]).sum(axis=2)
        dims = np.log2(inter).astype(np.int64)
        profile += np.bincount(dims.ravel(), minlength=k + 1)[: k + 1]
    return tuple(int(v) for v in profile)


def count_Jkl(n: int, k: int, l: int, mode: str = "auto", budget: int = DEFAULT_PAIR_BUDGET) -> tuple[int, int]:
    """(ordered pairs with l-dimensional intersection, upper bound 2^(2nk - nl))."""
    if not 0 <= l <= k <= n:
        raise ValueError("need 0 <= l <= k <= n")
    upper = 1 << (2 * n * k - n * l)
    if mode == "auto":
        mode = "exact" if gaussian_binomial(n, k) ** 2 <= budget else "formula"
    if mode == "exact":
        exact = intersection_profile(n, k, budget)[l]
    elif mode == "formula":
        exact = jkl_formula(n, k, l)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return exact, upper


# ---------------------------------------------------------------------------
# dense subspaces


def dense_threshold(k: int, epsilon: float) -> int:
    """``ceil((1/2 + eps) 2^k)``."""
    return math.ceil((Fraction(1, 2) + exact_decimal(epsilon)) * (1 << k))


@dataclass(frozen=True)
class Witness:
    basis: SubspaceBasis
    hits: int

    def to_json(self) -> dict:
        return {"rows": list(self.basis.rows), "hits": self.hits}


def _cube_dim(A: SubsetMask) -> int:
    if A.group.kind != BOOLEAN_CUBE:
        raise ValueError("dense subspace search needs a boolean-cube group")
    return A.group.dim


def dense_subspace_search(
    A: SubsetMask,
    k: int,
    epsilon: float,
    mode: str = "exhaustive",
    samples: int = 4096,
    seed=0,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> list[Witness]:
    """k-subspaces V with ``|A & V| >= ceil((1/2 + eps) 2^k)``.

    Sampled mode draws ``samples`` random k-tuples, drops dependent ones and
    deduplicates by canonical basis; its witness list is a lower bound.
    """
    n = _cube_dim(A)
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    H = dense_threshold(k, epsilon)
    bits = A.bits
    found: dict[tuple[int, ...], Witness] = {}
    if mode == "exhaustive":
        it = enumerate_subspaces(n, k, budget)
        while True:
            chunk = [b for _, b in zip(range(4096), it)]
            if not chunk:
                break
            rows = np.array([b.rows for b in chunk], dtype=np.int64).reshape(len(chunk), k)
            hits = bits[span_batch(rows)].sum(axis=1)
            for i in np.flatnonzero(hits >= H):
                found[chunk[i].rows] = Witness(chunk[i], int(hits[i]))
        return list(found.values())
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = as_rng(seed)
    rows = rng.integers(0, 1 << n, size=(samples, k), dtype=np.int64)
    el = span_batch(rows)
    srt = np.sort(el, axis=1)
    independent = np.all(np.diff(srt, axis=1) != 0, axis=1) if k else np.ones(samples, dtype=bool)
    hits = bits[el].sum(axis=1)
    for i in np.flatnonzero(independent & (hits >= H)):
        b = canonical_basis(rows[i], n)
        found.setdefault(b.rows, Witness(b, int(hits[i])))
    return sorted(found.values(), key=lambda w: w.basis.rows)


# ---------------------------------------------------------------------------
# second moment experiment


def subspace_dimension(n: int, c: int) -> int:
    """``floor(log2 n + log2 log2 n) + c``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.floor(math.log2(n) + math.log2(math.log2(n))) + c


@dataclass(frozen=True)
class SecondMomentConfig:
    n: int
    c: int
    epsilon: float
    trials: int
    seed: int = 0
    mode: str = "sampled"
    samples: int = 4096

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")

    @property
    def k(self) -> int:
        return subspace_dimension(self.n, self.c)

    @property
    def feasible(self) -> bool:
        return 2 ** (self.c + 1) * h(self.epsilon) < math.log(2)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def second_moment_trial(config: SecondMomentConfig, index: int) -> dict:
    group = make_group(BOOLEAN_CUBE, config.n)
    A = random_subset_density_half(group, Seed(config.seed, index))
    witnesses = dense_subspace_search(
        A, config.k, config.epsilon, config.mode, config.samples, Seed(config.seed, index).rng(1)
    )
    return {"trial": index, "A_size": A.cardinality, "witnesses": len(witnesses), "X_is_zero": not witnesses}


def second_moment_experiment(config: SecondMomentConfig, mapper=map) -> dict:
    """Estimate ``P(no (1/2+eps)-dense k-subspace)`` over random A of density 1/2."""
    k = config.k
    if not 0 <= k <= config.n:
        raise ValueError(f"k={k} outside [0, n={config.n}]")
    records = list(mapper(second_moment_trial, [config] * config.trials, range(config.trials)))
    zeros = sum(r["X_is_zero"] for r in records)
    low, high = wilson_interval(zeros, config.trials)
    K = 1 << k
    return {
        "config": config.__dict__ | {"k": k},
        "k": k,
        "K": K,
        "H": dense_threshold(k, config.epsilon),
        "feasible": config.feasible,
        "rate_check": 2 ** (config.c + 1) * h(config.epsilon),
        "log2": math.log(2),
        "trials": config.trials,
        "zero_count": zeros,
        "p_zero_hat": zeros / config.trials,
        "wilson_low": low,
        "wilson_high": high,
        "reference": (0.5 + config.epsilon) ** 2,
        "mode": config.mode,
        "sampled_lower_bound_on_witnesses": config.mode == "sampled",
        "records": records,
    }


# ---------------------------------------------------------------------------
# covariance at l = 0


@dataclass(frozen=True)
class CovarianceTerms:
    n: int | None
    k: int
    epsilon: float
    K: int
    H: int
    P_k: Fraction
    C_k0: Fraction
    ratio: Fraction
    pmf_ratio_sq: Fraction
    reference: Fraction

    @property
    def within_bound(self) -> bool:
        return self.ratio <= self.reference

    @property
    def degenerate(self) -> bool:
        return not self.within_bound

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "epsilon": self.epsilon,
            "K": self.K,
            "H": self.H,
            "P_k": str(self.P_k),
            "C_k0": str(self.C_k0),
            "ratio": str(self.ratio),
            "ratio_float": float(self.ratio),
            "pmf_ratio_sq": float(self.pmf_ratio_sq),
            "reference": float(self.reference),
            "within_bound": self.within_bound,
        }


def covariance_terms(n: int | None, k: int, epsilon: float) -> CovarianceTerms:
    """Exact ``P_k``, ``C_k^(0)`` and ``P_k^-2 C_k^(0)`` by conditioning on 0 in A.

    With ``Z ~ B(K-1, 1/2)``: ``P_k = (P(Z >= H-1) + P(Z >= H)) / 2`` and
    ``C_k^(0) = (P(Z >= H-1) - P(Z >= H))^2 / 4``.
    """
    K = 1 << k
    H = dense_threshold(k, epsilon)
    if not 1 <= H <= K:
        raise ValueError(f"threshold H={H} outside [1, K={K}]")
    a = binomial_tail_exact(K - 1, H - 1)
    b = binomial_tail_exact(K - 1, H)
    P = (a + b) / 2
    C = (a - b) ** 2 / 4
    p1, p0 = binomial_pmf_exact(K - 1, H - 1), binomial_pmf_exact(K - 1, H)
    return CovarianceTerms(
        n=n,
        k=k,
        epsilon=epsilon,
        K=K,
        H=H,
        P_k=P,
        C_k0=C,
        ratio=C / (P * P),
        pmf_ratio_sq=(p1 / (p1 + p0)) ** 2,
        reference=(Fraction(1, 2) + exact_decimal(epsilon)) ** 2,
    )


# ---------------------------------------------------------------------------
# sumsets


@dataclass
class SumsetResult:
    best: SubsetMask
    target_size: int
    met_target: bool
    restart_sizes: list[int]

    def to_json(self) -> dict:
        return {
            "best_size": self.best.cardinality,
            "target_size": self.target_size,
            "met_target": self.met_target,
            "restart_sizes": self.restart_sizes,
            "best": self.best.to_json(),
        }


def sumset_search(A: SubsetMask, target_size: int, restarts: int, seed) -> SumsetResult:
    """Greedy-with-restarts for a large X with X + X inside A (diagonal sums included)."""
    g = A.group
    if g.kind not in (CYCLIC, BOOLEAN_CUBE):
        raise ValueError("sumset search needs a cyclic or boolean-cube group")
    el = g.elements
    start_allowed = A.bits[g.op(el, el)]
    best, sizes = None, []
    for j in range(max(1, restarts)):
        rng = seed.rng(j) if isinstance(seed, Seed) else Seed(int(seed)).rng(j)
        order = rng.permutation(g.size)
        allowed = start_allowed.copy()
        chosen = []
        pos = 0
        while True:
            nxt = np.flatnonzero(allowed[order[pos:]])
            if nxt.size == 0:
                break
            pos += int(nxt[0])
            x = int(order[pos])
            chosen.append(x)
            allowed &= A.bits[g.op(x, el)]
            pos += 1
        sizes.append(len(chosen))
        if best is None or len(chosen) > len(best):
            best = chosen
    X = SubsetMask.from_elements(g, best)
    return SumsetResult(X, target_size, X.cardinality >= target_size, sizes)


def sumset_contained(X: SubsetMask, A: SubsetMask) -> bool:
    g = A.group
    xs = X.elements
    return bool(A.bits[g.op(xs[:, None], xs[None, :])].all())
