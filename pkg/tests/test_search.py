from fractions import Fraction

import numpy as np
import pytest

import oracles
from paleylab.discrepancy import count_pairs, exact_deviation
from paleylab.groups import Seed, SubsetMask, make_group, random_subset_density_half
from paleylab.search import AnnealSchedule, worst_pair_search


def literal_worst(A, n, min_x, min_y, op):
    As = A.elements.tolist()
    Ys = list(oracles.subsets_at_least(n, min_y))
    best = Fraction(-1)
    for X in oracles.subsets_at_least(n, min_x):
        for Y in Ys:
            best = max(best, oracles.deviation(X, Y, As, op))
    return best


def _check_outcome(out, A):
    assert out.exact_deviation == exact_deviation(out.best_X, out.best_Y, A)
    assert out.best_deviation == float(out.exact_deviation)
    pairs = out.best_X.cardinality * out.best_Y.cardinality
    assert out.exact_deviation == abs(Fraction(count_pairs(out.best_X, out.best_Y, A), pairs) - Fraction(1, 2))


@pytest.mark.parametrize("method", ["exhaustive", "greedy", "anneal"])
def test_full_A_gives_half(method):
    g = make_group("cyclic", 8)
    out = worst_pair_search(SubsetMask.full(g), 3, 2, method=method, budget=10**5, seed=1)
    assert out.best_deviation == 0.5
    assert out.best_X.cardinality >= 3 and out.best_Y.cardinality >= 2


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_exhaustive_matches_double_loop_Z8(seed):
    g = make_group("cyclic", 8)
    A = random_subset_density_half(g, Seed(seed, 77))
    out = worst_pair_search(A, 2, 2, method="exhaustive", budget=10**6)
    _check_outcome(out, A)
    assert out.exact_deviation == literal_worst(A, 8, 2, 2, oracles.add_mod(8))


def test_exhaustive_matches_double_loop_cube():
    g = make_group("cube", 3)
    A = SubsetMask.from_elements(g, [0, 3, 5, 6])
    out = worst_pair_search(A, 2, 3, method="exhaustive", budget=10**6)
    assert out.exact_deviation == literal_worst(A, 8, 2, 3, oracles.xor)


@pytest.mark.parametrize("seed", range(4))
def test_exhaustive_dominates_and_greedy_is_stable(seed):
    g = make_group("cyclic", 12)
    A = random_subset_density_half(g, Seed(seed, 5))
    ex = worst_pair_search(A, 3, 4, method="exhaustive", budget=10**6)
    for method in ("greedy", "anneal"):
        out = worst_pair_search(A, 3, 4, method=method, budget=20_000, seed=seed)
        _check_outcome(out, A)
        assert out.exact_deviation <= ex.exact_deviation
    again = worst_pair_search(A, 3, 4, method="greedy", budget=10_000, start=(ex.best_X, ex.best_Y))
    assert again.best_X == ex.best_X and again.best_Y == ex.best_Y


def test_anneal_finds_exhaustive_optimum_on_small_instance():
    g = make_group("cyclic", 10)
    A = random_subset_density_half(g, Seed(42))
    ex = worst_pair_search(A, 3, 3, method="exhaustive", budget=10**6)
    an = worst_pair_search(A, 3, 3, method="anneal", budget=40_000, seed=3,
                           schedule=AnnealSchedule(restarts=4))
    assert an.exact_deviation == ex.exact_deviation


def test_search_is_deterministic():
    g = make_group("cyclic", 64)
    A = random_subset_density_half(g, Seed(8))
    a = worst_pair_search(A, 10, 10, method="anneal", budget=5000, seed=Seed(3, 4))
    b = worst_pair_search(A, 10, 10, method="anneal", budget=5000, seed=Seed(3, 4))
    assert a.best_X == b.best_X and a.best_Y == b.best_Y and a.evaluations == b.evaluations


def test_floor_and_budget_errors():
    g = make_group("cyclic", 8)
    A = SubsetMask.full(g)
    with pytest.raises(ValueError):
        worst_pair_search(A, 9, 2)
    with pytest.raises(ValueError):
        worst_pair_search(A, 0, 2)
    with pytest.raises(ValueError):
        worst_pair_search(A, 4, 4, method="exhaustive", budget=100)
    with pytest.raises(ValueError):
        worst_pair_search(A, 2, 2, method="tabu")


def test_floors_respected_by_local_search():
    g = make_group("cyclic", 40)
    A = random_subset_density_half(g, Seed(2))
    for method in ("greedy", "anneal"):
        out = worst_pair_search(A, 12, 15, method=method, budget=5000, seed=1)
        assert out.best_X.cardinality >= 12 and out.best_Y.cardinality >= 15
        _check_outcome(out, A)


def test_json_shape():
    g = make_group("cyclic", 8)
    out = worst_pair_search(SubsetMask.from_elements(g, [1, 2]), 2, 2, method="exhaustive", budget=10**4)
    js = out.to_json()
    assert Fraction(js["exact_deviation"]) == out.exact_deviation
    assert np.isclose(js["best_deviation"], float(Fraction(js["exact_deviation"])))
