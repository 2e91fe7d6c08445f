import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from paleylab.groups import (
    GroupAxiomError,
    Seed,
    SignedIndicator,
    SubsetMask,
    check_group_axioms,
    is_prime,
    make_group,
    quadratic_residues,
    random_fixed_size_subset,
    random_subset_density_half,
    same_group,
    sample_fixed_size_batch,
)


def test_trivial_cyclic_group():
    g = make_group("cyclic", 1)
    assert g.size == 1 and g.identity == 0
    check_group_axioms(g)


def test_cube_and_cyclic_ops():
    assert int(make_group("boolean-cube", 3).op(3, 5)) == 6
    assert make_group("boolean-cube", 3).size == 8
    assert int(make_group("cyclic", 5).op(3, 4)) == 2


@pytest.mark.parametrize("kind,param", [("cyclic", n) for n in (1, 2, 7, 60, 256)] + [("cube", d) for d in (1, 4, 8)])
def test_axioms_exhaustive(kind, param):
    check_group_axioms(make_group(kind, param))


def test_table_group_from_symmetric_group():
    perms = list(itertools.permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    table = [[idx[tuple(a[b[j]] for j in range(3))] for b in perms] for a in perms]
    g = make_group("table", table)
    check_group_axioms(g)
    assert g.size == 6
    # nonabelian
    assert any(int(g.op(a, b)) != int(g.op(b, a)) for a in range(6) for b in range(6))
    assert all(int(g.op(x, g.inv(x))) == g.identity for x in range(6))


@pytest.mark.parametrize(
    "table,word",
    [
        ([[0, 1], [1, 1]], "inverse"),
        ([[1, 0], [1, 0]], "identity"),
        ([[0, 1, 2], [1, 2, 2], [2, 2, 2]], "inverse"),
        ([[0, 1, 2], [1, 2, 9], [2, 0, 1]], "closure"),
    ],
)
def test_bad_tables_name_the_axiom(table, word):
    with pytest.raises(GroupAxiomError, match=word):
        make_group("table", table)


def test_non_associative_table_rejected():
    # a Latin square with identity 0 and inverses that is not associative
    t = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(GroupAxiomError, match="associativ"):
        make_group("table", t)


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_group("dihedral", 4)


def test_density_half_deterministic():
    g = make_group("cyclic", 500)
    assert random_subset_density_half(g, Seed(3, 1)) == random_subset_density_half(g, Seed(3, 1))
    assert random_subset_density_half(g, Seed(3, 1)) != random_subset_density_half(g, Seed(3, 2))


def test_density_half_large_cardinality():
    N = 2**20
    A = random_subset_density_half(make_group("cyclic", N), Seed(11))
    assert abs(A.cardinality - N / 2) <= 5 * np.sqrt(N) / 2


def test_density_half_singleton_group():
    g = make_group("cyclic", 1)
    hits = sum(random_subset_density_half(g, Seed(s)).cardinality for s in range(10_000))
    assert abs(hits / 10_000 - 0.5) <= 0.05


def test_fixed_size_edge_cases():
    g = make_group("cyclic", 5)
    parent = SubsetMask.from_elements(g, [0, 1, 2])
    assert set(random_fixed_size_subset(parent, 3, 0).elements) == {0, 1, 2}
    assert random_fixed_size_subset(parent, 0, 0).cardinality == 0
    with pytest.raises(ValueError):
        random_fixed_size_subset(parent, 4, 0)
    with pytest.raises(ValueError):
        random_fixed_size_subset(parent, -1, 0)


def test_fixed_size_uniform_over_pairs():
    g = make_group("cyclic", 8)
    parent = SubsetMask.from_elements(g, [1, 3, 4, 6])
    trials = 60_000
    counts = Counter(tuple(random_fixed_size_subset(parent, 2, Seed(5, i)).elements) for i in range(trials))
    assert len(counts) == 6
    for c in counts.values():
        assert abs(c / trials - 1 / 6) <= 0.01


def test_fixed_size_inclusion_chi_square():
    m, s, trials = 10, 4, 10_000
    rng = Seed(8).rng()
    draws = sample_fixed_size_batch(np.arange(m), s, trials, rng)
    assert all(len(set(row)) == s for row in draws[:200])
    freq = np.bincount(draws.ravel(), minlength=m)
    assert chisquare(freq).pvalue > 1e-4
    assert np.allclose(freq / trials, s / m, atol=0.03)


def test_batch_sampler_uniform_over_subsets():
    rng = Seed(21).rng()
    draws = sample_fixed_size_batch(np.array([2, 5, 7, 9]), 2, 60_000, rng)
    counts = Counter(tuple(sorted(r)) for r in draws.tolist())
    assert len(counts) == 6
    assert all(abs(c / 60_000 - 1 / 6) <= 0.01 for c in counts.values())


@pytest.mark.parametrize("p,expected", [(5, {1, 4}), (7, {1, 2, 4}), (3, {1})])
def test_quadratic_residues_examples(p, expected):
    assert set(quadratic_residues(p).elements.tolist()) == expected


def test_quadratic_residue_cardinality():
    for p in [q for q in range(3, 600) if is_prime(q)]:
        Q = quadratic_residues(p)
        assert Q.cardinality == (p - 1) // 2
        assert 0 not in Q


@pytest.mark.parametrize("p", [1, 2, 9, 15, 91])
def test_quadratic_residues_rejects(p):
    with pytest.raises(ValueError):
        quadratic_residues(p)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 300), st.data())
def test_mask_roundtrips(n, data):
    g = make_group("cyclic", n)
    bits = data.draw(st.lists(st.booleans(), min_size=n, max_size=n))
    m = SubsetMask(g, bits)
    assert m.cardinality == sum(bits)
    assert SubsetMask.from_json(g, m.to_json()) == m
    assert SubsetMask.from_hex(g, m.to_hex()) == m
    assert m.to_json()["elements"] == sorted(m.to_json()["elements"])


def test_hex_little_endian():
    g = make_group("cyclic", 10)
    assert SubsetMask.from_elements(g, [0]).to_hex() == "0100"
    assert SubsetMask.from_elements(g, [1, 9]).to_hex() == "0202"


def test_mask_validation():
    g = make_group("cyclic", 4)
    with pytest.raises(ValueError):
        SubsetMask(g, [1, 0, 1])
    with pytest.raises(ValueError):
        SubsetMask.from_elements(g, [4])
    with pytest.raises(ValueError):
        same_group(SubsetMask.full(g), SubsetMask.full(make_group("cyclic", 5)))


def test_signed_indicator():
    g = make_group("cyclic", 5)
    f = SignedIndicator.from_mask(SubsetMask.from_elements(g, [1, 4]))
    assert f.values.tolist() == [-1, 1, -1, -1, 1]
    with pytest.raises(ValueError):
        SignedIndicator.from_values([1, 0])


def test_seed_streams_are_independent_and_stable():
    a = Seed(1, 0).rng(3).integers(0, 2**32, 4)
    b = Seed(1, 0).rng(3).integers(0, 2**32, 4)
    c = Seed(1, 1).rng(3).integers(0, 2**32, 4)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    with pytest.raises(ValueError):
        Seed(-1)
