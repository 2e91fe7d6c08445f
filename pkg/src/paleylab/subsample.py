"""Random subsampling of (X, Y) into (S, T) and its exact expectations.

S is a uniform s-subset of X and T a uniform t-subset of Y.  Inner products
are routed through integer pair counts:
``<N^2 1_S*1_T / (st), f> = sum_{x in S, y in T} f(xy) / (st)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .discrepancy import energy
from .groups import Group, SignedIndicator, SubsetMask, as_rng, sample_fixed_size_batch, same_group

EPS_NUMERATOR = 1e5
S_CONSTANT = 2000
T_CONSTANT = 50
_BATCH = 8192


@dataclass(frozen=True)
class SubsampleParams:
    N: int
    w_value: float
    epsilon: float
    s: int
    t: int
    s_raw: int
    t_raw: int
    s_clamped: bool
    t_clamped: bool

    @property
    def clamped(self) -> bool:
        return self.s_clamped or self.t_clamped

    def to_json(self) -> dict:
        return asdict(self) | {"clamped": self.clamped}


@dataclass(frozen=True)
class LemmaCheckReport:
    exact_expectation: Fraction | None
    lemma_rhs: float
    monte_carlo_mean: float
    monte_carlo_stderr: float
    trials: int
    within_mc_tolerance: bool
    below_rhs: bool

    def to_json(self) -> dict:
        d = asdict(self)
        if self.exact_expectation is not None:
            d["exact_expectation"] = str(self.exact_expectation)
            d["exact_expectation_float"] = float(self.exact_expectation)
        return d


def epsilon_of_w(w_value: float) -> float:
    return (EPS_NUMERATOR / w_value) ** (1.0 / 6.0)


def choose_params(N: int, w_value: float, x_size: int, y_size: int) -> SubsampleParams:
    """s = ceil(2000 log N / eps^4), t = ceil(|Y| eps^2 / (50 log N)), clamped into range."""
    if N < 3:
        raise ValueError("N must be >= 3")
    if w_value <= 0:
        raise ValueError("w must be positive")
    if not 1 <= x_size <= y_size:
        raise ValueError("need 1 <= |X| <= |Y|")
    eps = epsilon_of_w(w_value)
    logn = math.log(N)
    s_raw = math.ceil(S_CONSTANT * logn / eps**4)
    t_raw = math.ceil(y_size * eps**2 / (T_CONSTANT * logn))
    s = min(max(s_raw, 1), x_size)
    t = min(max(t_raw, 1), y_size)
    return SubsampleParams(
        N=N,
        w_value=w_value,
        epsilon=eps,
        s=s,
        t=t,
        s_raw=s_raw,
        t_raw=t_raw,
        s_clamped=s != s_raw,
        t_clamped=t != t_raw,
    )


def _check_sizes(X: SubsetMask, Y: SubsetMask, s: int, t: int) -> Group:
    g = same_group(X, Y)
    if not 1 <= s <= X.cardinality:
        raise ValueError(f"s={s} outside [1, |X|={X.cardinality}]")
    if not 1 <= t <= Y.cardinality:
        raise ValueError(f"t={t} outside [1, |Y|={Y.cardinality}]")
    return g


def _falling2(m: int) -> int:
    return m * (m - 1)


def exact_expected_energy(X: SubsetMask, Y: SubsetMask, s: int, t: int, E_XY: int | None = None):
    """Exact ``E ||1_S * 1_T||_2^2`` and its closed-form upper bound, as Fractions.

    In a group ``x1 y1 = x2 y2`` with ``x1 = x2`` forces ``y1 = y2``, so the
    off-diagonal quadruples number exactly ``E(X, Y) - |X||Y|`` and each lies
    in S x T x S x T with probability ``s(s-1) t(t-1) / (|X|(|X|-1) |Y|(|Y|-1))``.
    """
    g = _check_sizes(X, Y, s, t)
    n3 = g.size**3
    mx, my = X.cardinality, Y.cardinality
    E = energy(X, Y) if E_XY is None else E_XY
    diag = Fraction(s * t, n3)
    if s < 2 or t < 2:
        exact = diag
    else:
        exact = diag + Fraction((E - mx * my) * _falling2(s) * _falling2(t), n3 * _falling2(mx) * _falling2(my))
    rhs = diag + Fraction(s * s * t * t * E, mx * mx * my * my * n3)
    return exact, rhs


def _batch_products(group: Group, S: np.ndarray, T: np.ndarray) -> np.ndarray:
    return group.op(S[:, :, None], T[:, None, :]).reshape(S.shape[0], -1)


def batch_energy(group: Group, S: np.ndarray, T: np.ndarray) -> np.ndarray:
    """``E(S_i, T_i)`` for each row of the (B, s) and (B, t) index arrays."""
    prods = _batch_products(group, S, T)
    b = prods.shape[0]
    flat = (prods + group.size * np.arange(b)[:, None]).ravel()
    r = np.bincount(flat, minlength=b * group.size).reshape(b, group.size)
    return np.einsum("ij,ij->i", r, r)


def batch_signed_sum(group: Group, f: np.ndarray, S: np.ndarray, T: np.ndarray) -> np.ndarray:
    return f[_batch_products(group, S, T)].sum(axis=1)


def _draws(X, Y, s, t, trials, rng):
    xs, ys = X.elements, Y.elements
    cap = max(1, min(_BATCH, (1 << 22) // X.group.size))
    done = 0
    while done < trials:
        b = min(cap, trials - done)
        yield sample_fixed_size_batch(xs, s, b, rng), sample_fixed_size_batch(ys, t, b, rng)
        done += b


def mc_expected_energy(X: SubsetMask, Y: SubsetMask, s: int, t: int, trials: int, seed) -> LemmaCheckReport:
    """Monte Carlo estimate of ``E ||1_S * 1_T||_2^2`` against the exact value."""
    g = _check_sizes(X, Y, s, t)
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = as_rng(seed)
    exact, rhs = exact_expected_energy(X, Y, s, t)
    total, total_sq = 0, 0
    for S, T in _draws(X, Y, s, t, trials, rng):
        e = batch_energy(g, S, T)
        total += int(e.sum())
        total_sq += int(np.dot(e, e))
    n3 = g.size**3
    mean = Fraction(total, trials * n3)
    var = Fraction(total_sq * trials - total * total, trials * max(1, trials - 1)) / (n3 * n3)
    stderr = math.sqrt(float(var) / trials)
    return LemmaCheckReport(
        exact_expectation=exact,
        lemma_rhs=float(rhs),
        monte_carlo_mean=float(mean),
        monte_carlo_stderr=stderr,
        trials=trials,
        within_mc_tolerance=abs(float(mean - exact)) <= 4 * stderr,
        below_rhs=exact <= rhs,
    )


def _f_values(f, group: Group) -> np.ndarray:
    v = f.values if isinstance(f, SignedIndicator) else np.asarray(f, dtype=np.int64)
    if v.shape != (group.size,):
        raise ValueError("f length does not match group order")
    return v


def inner_product(X: SubsetMask, Y: SubsetMask, f) -> Fraction:
    """``<N^2 1_X*1_Y / (|X||Y|), f>`` exactly."""
    g = same_group(X, Y)
    v = _f_values(f, g)
    prods = g.op(X.elements[:, None], Y.elements[None, :])
    return Fraction(int(v[prods].sum()), X.cardinality * Y.cardinality)


def closeness_bound(y_size: int, s: int, t: int) -> float:
    return 2.0 * math.sqrt(y_size / (s * t))


def mc_closeness(X: SubsetMask, Y: SubsetMask, f, s: int, t: int, trials: int, seed) -> LemmaCheckReport:
    """Monte Carlo mean of the inner-product gap between (S, T) and (X, Y)."""
    g = _check_sizes(X, Y, s, t)
    rng = as_rng(seed)
    v = _f_values(f, g)
    mx, my = X.cardinality, Y.cardinality
    base = inner_product(X, Y, v)
    # gap * st * |X||Y| is an integer
    base_num = base.numerator * (s * t * mx * my // base.denominator)
    scale = s * t * mx * my
    total, total_sq = 0, 0.0
    for S, T in _draws(X, Y, s, t, trials, rng):
        gap = np.abs(batch_signed_sum(g, v, S, T) * (mx * my) - base_num)
        total += int(gap.sum())
        gf = gap / scale
        total_sq += float(np.dot(gf, gf))
    mean = Fraction(total, trials * scale)
    var = max(0.0, (total_sq - trials * float(mean) ** 2) / max(1, trials - 1))
    stderr = math.sqrt(var / trials)
    rhs = closeness_bound(my, s, t)
    return LemmaCheckReport(
        exact_expectation=None,
        lemma_rhs=rhs,
        monte_carlo_mean=float(mean),
        monte_carlo_stderr=stderr,
        trials=trials,
        within_mc_tolerance=float(mean) <= rhs + 4 * stderr,
        below_rhs=float(mean) <= rhs,
    )


# ---------------------------------------------------------------------------
# rejection sampler


@dataclass
class STWitness:
    S: SubsetMask
    T: SubsetMask
    attempts: int
    inner_gap: Fraction
    energy_ST: int
    energy_ratio: Fraction
    property2_holds: bool

    def to_json(self) -> dict:
        return {
            "S": self.S.to_json(),
            "T": self.T.to_json(),
            "attempts": self.attempts,
            "inner_gap": float(self.inner_gap),
            "energy_ST": self.energy_ST,
            "energy_ratio": float(self.energy_ratio),
            "property2_holds": self.property2_holds,
        }


class FindSTFailure(RuntimeError):
    def __init__(self, attempts: int, accepted: int, closeness_ok: int, energy_ok: int):
        self.attempts = attempts
        self.acceptance_rate = accepted / attempts if attempts else 0.0
        self.closeness_rate = closeness_ok / attempts if attempts else 0.0
        self.energy_rate = energy_ok / attempts if attempts else 0.0
        super().__init__(
            f"no acceptable (S, T) in {attempts} attempts "
            f"(closeness pass rate {self.closeness_rate:.3f}, energy pass rate {self.energy_rate:.3f})"
        )


def closeness_condition(gap: Fraction, y_size: int, s: int, t: int) -> bool:
    """``gap <= 6 sqrt(|Y| / (st))``, compared exactly after squaring."""
    return gap * gap * (s * t) <= 36 * y_size


def energy_condition(E_ST: int, E_XY: int, x_size: int, y_size: int, s: int, t: int) -> bool:
    """``||1_S*1_T||^2 <= 3st/N^3 + 3 s^2 t^2 ||1_X*1_Y||^2 / (|X|^2 |Y|^2)``, times N^3."""
    xy2 = (x_size * y_size) ** 2
    return E_ST * xy2 <= 3 * s * t * xy2 + 3 * (s * t) ** 2 * E_XY


def energy_ratio(E_ST: int, N: int, s: int, t: int) -> Fraction:
    """``s^2 t^2 / (N^3 ||1_S*1_T||^2) = s^2 t^2 / E(S, T)``."""
    return Fraction((s * t) ** 2, E_ST)


def find_ST(X: SubsetMask, Y: SubsetMask, f, params: SubsampleParams, max_attempts: int = 100, seed=0) -> STWitness:
    """Sample (S, T) until both the closeness and the energy condition hold."""
    g = same_group(X, Y)
    if X.cardinality > Y.cardinality:
        raise ValueError("need |X| <= |Y|")
    s, t = params.s, params.t
    _check_sizes(X, Y, s, t)
    rng = as_rng(seed)
    v = _f_values(f, g)
    base = inner_product(X, Y, v)
    E_XY = energy(X, Y)
    mx, my = X.cardinality, Y.cardinality
    close_ok = energy_ok = 0
    for attempt in range(1, max_attempts + 1):
        S = SubsetMask.from_elements(g, sample_fixed_size_batch(X.elements, s, 1, rng)[0])
        T = SubsetMask.from_elements(g, sample_fixed_size_batch(Y.elements, t, 1, rng)[0])
        gap = abs(inner_product(S, T, v) - base)
        E_ST = energy(S, T, cross_check=False)
        c1 = closeness_condition(gap, my, s, t)
        c2 = energy_condition(E_ST, E_XY, mx, my, s, t)
        close_ok += c1
        energy_ok += c2
        if c1 and c2:
            return STWitness(
                S=S,
                T=T,
                attempts=attempt,
                inner_gap=gap,
                energy_ST=E_ST,
                energy_ratio=energy_ratio(E_ST, g.size, s, t),
                property2_holds=float(gap) <= params.epsilon,
            )
    raise FindSTFailure(max_attempts, 0, close_ok, energy_ok)


def property3_threshold(t: int, N: int, epsilon: float) -> float:
    """``6 |T| log N / eps^2``, the ratio needed for the union bound to close."""
    return 6.0 * t * math.log(N) / epsilon**2
