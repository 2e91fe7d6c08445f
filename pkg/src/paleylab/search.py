"""Adversarial search for the pair (X, Y) that A extracts worst.

All three methods maximize ``|count(X, Y, A) / (|X||Y|) - 1/2|`` subject to
``|X| >= min_x`` and ``|Y| >= min_y``.

The exhaustive method enumerates every admissible X.  For fixed X each y
contributes ``c(y) = #{x in X : xy in A}`` to the count, so the extreme
Y of size at least ``min_y`` is the top (or bottom) ``min_y`` entries of c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .discrepancy import count_pairs
from .groups import Seed, SubsetMask, as_rng

EXHAUSTIVE_MAX_N = 22
_CHUNK = 1 << 15
HALF = Fraction(1, 2)


@dataclass
class SearchOutcome:
    best_X: SubsetMask
    best_Y: SubsetMask
    best_deviation: float
    method: str
    evaluations: int
    exact_deviation: Fraction = field(default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "best_deviation": self.best_deviation,
            "exact_deviation": str(self.exact_deviation),
            "evaluations": self.evaluations,
            "x_size": self.best_X.cardinality,
            "y_size": self.best_Y.cardinality,
            "best_X": self.best_X.to_json(),
            "best_Y": self.best_Y.to_json(),
        }


@dataclass(frozen=True)
class AnnealSchedule:
    t_start: float = 0.02
    t_end: float = 1e-4
    restarts: int = 4
    swap_prob: float = 0.8
    polish: bool = True


def _deviation(count: int, a: int, b: int) -> Fraction:
    return abs(Fraction(count, a * b) - HALF)


def _outcome(A, X_bits, Y_bits, method, evaluations) -> SearchOutcome:
    X = SubsetMask(A.group, X_bits)
    Y = SubsetMask(A.group, Y_bits)
    dev = _deviation(count_pairs(X, Y, A), X.cardinality, Y.cardinality)
    return SearchOutcome(X, Y, float(dev), method, evaluations, dev)


def _check_floors(n: int, min_x: int, min_y: int) -> None:
    if min_x < 1 or min_y < 1:
        raise ValueError("size floors must be >= 1")
    if min_x > n or min_y > n:
        raise ValueError(f"infeasible size floors ({min_x}, {min_y}) for group of order {n}")


def _restart_rng(seed, j: int) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    s = seed if isinstance(seed, Seed) else Seed(int(seed))
    return s.rng(j)


def worst_pair_search(
    A: SubsetMask,
    min_size_X: int,
    min_size_Y: int,
    method: str = "anneal",
    budget: int = 100_000,
    seed=0,
    start: tuple[SubsetMask, SubsetMask] | None = None,
    schedule: AnnealSchedule = AnnealSchedule(),
) -> SearchOutcome:
    """Maximize the extraction deviation of A over pairs meeting the size floors.

    ``budget`` caps evaluations for greedy/anneal; for the exhaustive method
    it must cover ``C(N, min_x) * C(N, min_y)``.
    """
    n = A.group.size
    _check_floors(n, min_size_X, min_size_Y)
    if method == "exhaustive":
        return _exhaustive(A, min_size_X, min_size_Y, budget)
    if method == "greedy":
        rng = _restart_rng(seed, 0)
        X_bits, Y_bits = _initial_pair(n, min_size_X, min_size_Y, rng, start)
        st = _State(A, X_bits, Y_bits)
        evals = _greedy(st, min_size_X, min_size_Y, budget)
        return _outcome(A, st.X, st.Y, "greedy", evals)
    if method == "anneal":
        return _anneal(A, min_size_X, min_size_Y, budget, seed, start, schedule)
    raise ValueError(f"unknown search method {method!r}")


# ---------------------------------------------------------------------------
# exhaustive


def _exhaustive(A: SubsetMask, min_x: int, min_y: int, budget: int) -> SearchOutcome:
    g = A.group
    n = g.size
    if math.comb(n, min_x) * math.comb(n, min_y) > budget:
        raise ValueError("exhaustive search exceeds budget; use greedy or anneal")
    if n > EXHAUSTIVE_MAX_N:
        raise ValueError(f"exhaustive search limited to N <= {EXHAUSTIVE_MAX_N}")
    el = g.elements
    # table[x, y] = 1_A(xy); exact in float32 for these sizes
    table = A.bits[g.op(el[:, None], el[None, :])].astype(np.float32)
    shifts = np.arange(n, dtype=np.int64)
    best_num, best_den, best = -1, 1, None
    evaluations = 0
    for lo in range(0, 1 << n, _CHUNK):
        masks = np.arange(lo, min(1 << n, lo + _CHUNK), dtype=np.int64)
        sizes = np.bitwise_count(masks).astype(np.int64)
        keep = sizes >= min_x
        masks, sizes = masks[keep], sizes[keep]
        if masks.size == 0:
            continue
        evaluations += int(masks.size)
        bits = ((masks[:, None] >> shifts) & 1).astype(np.float32)
        c = np.rint(bits @ table).astype(np.int64)
        order = np.argsort(c, axis=1, kind="stable")
        cs = np.take_along_axis(c, order, axis=1)
        top = cs[:, n - min_y :].sum(axis=1)
        bottom = cs[:, :min_y].sum(axis=1)
        den = 2 * sizes * min_y
        up = 2 * top - sizes * min_y
        down = sizes * min_y - 2 * bottom
        num = np.maximum(up, down)
        # exact argmax of num/den by cross-multiplication against the float leader
        i = int(np.argmax(num / den))
        cand = np.flatnonzero(num * den[i] == num[i] * den)
        i = int(cand[0])
        if best is None or num[i] * best_den > best_num * den[i]:
            best_num, best_den = int(num[i]), int(den[i])
            ys = order[i, n - min_y :] if up[i] >= down[i] else order[i, :min_y]
            best = (int(masks[i]), ys.copy())
    mask, ys = best
    X_bits = ((mask >> shifts) & 1).astype(bool)
    Y_bits = np.zeros(n, dtype=bool)
    Y_bits[ys] = True
    out = _outcome(A, X_bits, Y_bits, "exhaustive", evaluations)
    if out.exact_deviation != Fraction(best_num, best_den):
        raise ArithmeticError("exhaustive optimum failed recomputation")
    return out


# ---------------------------------------------------------------------------
# local search state


class _State:
    """(X, Y) with per-candidate counts kept incrementally.

    ``d[x] = #{y in Y : xy in A}`` and ``c[y] = #{x in X : xy in A}``.
    """

    def __init__(self, A: SubsetMask, X_bits: np.ndarray, Y_bits: np.ndarray):
        self.A = A
        g = A.group
        self.el = g.elements
        self.X = np.array(X_bits, dtype=bool)
        self.Y = np.array(Y_bits, dtype=bool)
        xs, ys = np.flatnonzero(self.X), np.flatnonzero(self.Y)
        self.d = A.bits[g.op(self.el[:, None], ys[None, :])].sum(axis=1).astype(np.int64)
        self.c = A.bits[g.op(xs[:, None], self.el[None, :])].sum(axis=0).astype(np.int64)
        self.a = xs.size
        self.b = ys.size
        self.count = int(self.d[self.X].sum())

    def row(self, x: int) -> np.ndarray:
        return self.A.bits[self.A.group.op(x, self.el)]

    def col(self, y: int) -> np.ndarray:
        return self.A.bits[self.A.group.op(self.el, y)]

    def toggle_x(self, x: int) -> None:
        if self.X[x]:
            self.X[x] = False
            self.a -= 1
            self.count -= int(self.d[x])
            self.c -= self.row(x)
        else:
            self.X[x] = True
            self.a += 1
            self.count += int(self.d[x])
            self.c += self.row(x)

    def toggle_y(self, y: int) -> None:
        if self.Y[y]:
            self.Y[y] = False
            self.b -= 1
            self.count -= int(self.c[y])
            self.d -= self.col(y)
        else:
            self.Y[y] = True
            self.b += 1
            self.count += int(self.c[y])
            self.d += self.col(y)

    def deviation(self) -> Fraction:
        return _deviation(self.count, self.a, self.b)


def _initial_pair(n, min_x, min_y, rng, start):
    if start is not None:
        X, Y = start
        if X.cardinality < min_x or Y.cardinality < min_y:
            raise ValueError("start pair violates the size floors")
        return X.bits.copy(), Y.bits.copy()
    X_bits = np.zeros(n, dtype=bool)
    Y_bits = np.zeros(n, dtype=bool)
    X_bits[rng.choice(n, size=min_x, replace=False)] = True
    Y_bits[rng.choice(n, size=min_y, replace=False)] = True
    return X_bits, Y_bits


def _extremes(values: np.ndarray, member: np.ndarray):
    """(argmin, argmax) of ``values`` over members and over non-members."""
    out = []
    for sel in (member, ~member):
        idx = np.flatnonzero(sel)
        if idx.size == 0:
            out.append(())
            continue
        v = values[idx]
        out.append((int(idx[np.argmin(v)]), int(idx[np.argmax(v)])))
    return out


def _best_move(st: _State, min_x: int, min_y: int):
    """Best single swap/add/remove on either side, judged by exact deviation.

    For a fixed move type the new deviation is convex in the count change,
    so only extreme candidates need to be examined.
    """
    cur = st.deviation()
    best_dev, best_move, evals = cur, None, 0
    n = st.A.group.size
    for side, vals, member, size, other, floor in (
        ("x", st.d, st.X, st.a, st.b, min_x),
        ("y", st.c, st.Y, st.b, st.a, min_y),
    ):
        inside, outside = _extremes(vals, member)
        cands = []
        for o in inside:
            for i in outside:
                cands.append(((o, i), int(vals[i]) - int(vals[o]), size))
        for i in outside:
            cands.append(((i,), int(vals[i]), size + 1))
        if size > floor:
            for o in inside:
                cands.append(((o,), -int(vals[o]), size - 1))
        for toggles, delta, new_size in cands:
            if new_size > n:
                continue
            evals += 1
            dev = _deviation(st.count + delta, new_size, other) if side == "x" else _deviation(
                st.count + delta, other, new_size
            )
            if dev > best_dev:
                best_dev, best_move = dev, (side, toggles)
    return best_move, evals


def _greedy(st: _State, min_x: int, min_y: int, budget: int) -> int:
    evals = 0
    while evals < budget:
        move, used = _best_move(st, min_x, min_y)
        evals += used
        if move is None:
            break
        side, toggles = move
        for t in toggles:
            (st.toggle_x if side == "x" else st.toggle_y)(t)
    return evals


# ---------------------------------------------------------------------------
# simulated annealing


class _Members:
    """Inside/outside index lists supporting O(1) random picks and moves."""

    def __init__(self, bits: np.ndarray):
        n = bits.size
        self.order = np.concatenate([np.flatnonzero(bits), np.flatnonzero(~bits)])
        self.pos = np.empty(n, dtype=np.int64)
        self.pos[self.order] = np.arange(n)
        self.k = int(bits.sum())
        self.n = n

    def pick_in(self, u: float) -> int:
        return int(self.order[int(u * self.k)])

    def pick_out(self, u: float) -> int:
        return int(self.order[self.k + int(u * (self.n - self.k))])

    def _swap(self, i: int, j: int) -> None:
        a, b = self.order[i], self.order[j]
        self.order[i], self.order[j] = b, a
        self.pos[a], self.pos[b] = j, i

    def toggle(self, e: int) -> None:
        p = int(self.pos[e])
        if p < self.k:
            self._swap(p, self.k - 1)
            self.k -= 1
        else:
            self._swap(p, self.k)
            self.k += 1


def _anneal(A, min_x, min_y, budget, seed, start, schedule: AnnealSchedule) -> SearchOutcome:
    n = A.group.size
    restarts = max(1, schedule.restarts)
    per_restart = max(1, budget // restarts)
    best_dev, best_pair, evals = None, None, 0
    for j in range(restarts):
        rng = _restart_rng(seed, j)
        X_bits, Y_bits = _initial_pair(n, min_x, min_y, rng, start if j == 0 else None)
        st = _State(A, X_bits, Y_bits)
        mx, my = _Members(st.X), _Members(st.Y)
        cur = abs(st.count / (st.a * st.b) - 0.5)
        r_best = cur
        r_pair = (st.X.copy(), st.Y.copy())
        steps = per_restart
        cool = (schedule.t_end / schedule.t_start) ** (1.0 / max(1, steps - 1))
        temp = schedule.t_start
        u = rng.random((steps, 5))
        for step in range(steps):
            side_x = u[step, 0] < 0.5
            members, size, floor = (mx, st.a, min_x) if side_x else (my, st.b, min_y)
            vals = st.d if side_x else st.c
            kind = u[step, 1]
            if kind < schedule.swap_prob and 0 < size < n:
                o, i = members.pick_in(u[step, 2]), members.pick_out(u[step, 3])
                delta, new_size, toggles = int(vals[i]) - int(vals[o]), size, (o, i)
            elif (kind < (1 + schedule.swap_prob) / 2 or size <= floor) and size < n:
                i = members.pick_out(u[step, 3])
                delta, new_size, toggles = int(vals[i]), size + 1, (i,)
            elif size > floor:
                o = members.pick_in(u[step, 2])
                delta, new_size, toggles = -int(vals[o]), size - 1, (o,)
            else:
                continue
            a, b = (new_size, st.b) if side_x else (st.a, new_size)
            new = abs((st.count + delta) / (a * b) - 0.5)
            if new >= cur or u[step, 4] < math.exp((new - cur) / temp):
                for t in toggles:
                    (st.toggle_x if side_x else st.toggle_y)(t)
                    members.toggle(t)
                cur = new
                if cur > r_best:
                    r_best = cur
                    r_pair = (st.X.copy(), st.Y.copy())
            temp *= cool
        evals += steps
        if schedule.polish:
            st = _State(A, *r_pair)
            evals += _greedy(st, min_x, min_y, per_restart)
            r_pair = (st.X.copy(), st.Y.copy())
        dev = _deviation(count_pairs(SubsetMask(A.group, r_pair[0]), SubsetMask(A.group, r_pair[1]), A),
                         int(r_pair[0].sum()), int(r_pair[1].sum()))
        if best_dev is None or dev > best_dev:
            best_dev, best_pair = dev, r_pair
    return _outcome(A, best_pair[0], best_pair[1], "anneal", evals)
