"""Acceptance battery: one test per criterion, each printing a PASS/FAIL line.

Runtime limits are asserted alongside the numerical checks.  Criteria 10, 11
and 14 are observational; their lines carry the reported numbers.
"""

import math
import statistics
import time
from fractions import Fraction
from math import comb

import numpy as np
import pytest

import oracles
from paleylab.discrepancy import energy, er_bipartite_deviation, er_envelope, rep_counts
from paleylab.extractor import certify_extractor
from paleylab.fourier import (
    cauchy_schwarz_intermediate,
    character_sum,
    fast_energy,
    fourier_discrepancy_bound,
    gauss_sum_profile,
    quadratic_character,
)
from paleylab.groups import (
    Seed,
    SignedIndicator,
    SubsetMask,
    make_group,
    quadratic_residues,
    random_fixed_size_subset,
    random_subset_density_half,
)
from paleylab.search import worst_pair_search
from paleylab.subsample import (
    FindSTFailure,
    choose_params,
    closeness_bound,
    exact_expected_energy,
    find_ST,
    mc_closeness,
    mc_expected_energy,
)
from paleylab.subspace import SecondMomentConfig, count_Ik, count_Jkl, covariance_terms, second_moment_experiment
from paleylab.tail_bounds import sweep_summary, tail_sweep


@pytest.fixture
def verdict(capsys):
    t0 = time.perf_counter()

    def emit(number, ok, detail, limit):
        elapsed = time.perf_counter() - t0
        ok = bool(ok) and elapsed < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{elapsed:.1f}s, limit {limit:g}s]")
        assert ok, detail

    return emit


def _op(kind, N):
    return oracles.add_mod(N) if kind == "cyclic" else oracles.xor


def test_criterion_01_gauss_profile(verdict):
    worst, zero = 0.0, 0.0
    for p in (5, 13, 29, 101, 997):
        prof = gauss_sum_profile(p)
        worst = max(worst, float(np.abs(prof[1:] - p**-0.5).max()))
        zero = max(zero, float(prof[0]))
    verdict(1, worst <= 1e-9 and zero <= 1e-12, f"max ||chi^(r)| - p^-1/2| = {worst:.2e}, |chi^(0)| = {zero:.1e}", 1)


def test_criterion_02_fourier_bound(verdict):
    violations = cs_violations = total = 0
    for p in (13, 29, 101):
        g = make_group("cyclic", p)
        chi = quadratic_character(p)
        full = SubsetMask.full(g)
        rng = Seed(2, p).rng()
        for i in range(2000):
            X = random_fixed_size_subset(full, int(rng.integers(2, p // 2 + 1)), rng)
            Y = random_fixed_size_subset(full, int(rng.integers(2, p // 2 + 1)), rng)
            lhs = abs(int(np.dot(rep_counts(X, Y).counts, chi.values)))
            assert lhs == abs(character_sum(X, Y, chi))
            violations += lhs > fourier_discrepancy_bound(X, Y, chi)
            cs_violations += lhs > cauchy_schwarz_intermediate(X, Y, chi) * (1 + 1e-12)
            total += 1
    verdict(2, violations == 0 and cs_violations == 0,
            f"{total} pairs, {violations} bound violations, {cs_violations} intermediate violations", 10)


def test_criterion_03_energy_oracle(verdict):
    mismatches = total = 0
    for kind, param in (("cyclic", 64), ("cyclic", 4096), ("cube", 6), ("cube", 12)):
        g = make_group(kind, param)
        rng = Seed(3, param).rng()
        for _ in range(100):
            X = SubsetMask(g, rng.random(g.size) < rng.uniform(0.01, 0.6))
            Y = SubsetMask(g, rng.random(g.size) < rng.uniform(0.01, 0.6))
            if not X.cardinality or not Y.cardinality:
                X, Y = SubsetMask.from_elements(g, [1]), SubsetMask.from_elements(g, [0, 2])
            mismatches += fast_energy(X, Y) != energy(X, Y, cross_check=False)
            total += 1
    verdict(3, mismatches == 0, f"{total} instances, {mismatches} mismatches", 30)


def _battery():
    """50 instances over Z/256 and F_2^8; every other one is drawn from a small structured piece."""
    out = []
    for i in range(50):
        kind, param = ("cyclic", 256) if i < 25 else ("cube", 8)
        g = make_group(kind, param)
        rng = Seed(45, i).rng()
        mx = int(rng.integers(4, 9))
        my = int(rng.integers(mx, 11))
        if i % 2:
            # interval in Z/256, subgroup of size 16 in F_2^8
            pool = SubsetMask.from_elements(g, range(16))
        else:
            pool = SubsetMask.full(g)
        X = random_fixed_size_subset(pool, mx, rng)
        Y = random_fixed_size_subset(pool, my, rng)
        s, t = int(rng.integers(1, mx + 1)), int(rng.integers(1, my + 1))
        f = SignedIndicator.from_mask(random_subset_density_half(g, rng))
        out.append((kind, g, X, Y, s, t, f, Seed(46, i)))
    return out


def test_criterion_04_expected_energy(verdict):
    brute = exact_ok = rhs_ok = mc_ok = 0
    for kind, g, X, Y, s, t, _, seed in _battery():
        exact, rhs = exact_expected_energy(X, Y, s, t)
        if comb(X.cardinality, s) * comb(Y.cardinality, t) <= 10**6:
            brute += 1
            avg = oracles.mean_energy_over_all_subsets(X.elements.tolist(), Y.elements.tolist(), s, t, _op(kind, g.size))
            exact_ok += exact == avg / g.size**3
        rhs_ok += exact <= rhs
        mc_ok += mc_expected_energy(X, Y, s, t, 10**5, seed).within_mc_tolerance
    verdict(4, exact_ok == brute and rhs_ok == 50 and mc_ok == 50,
            f"exact == brute force on {exact_ok}/{brute}, below RHS {rhs_ok}/50, MC within 4 se {mc_ok}/50", 300)


def test_criterion_05_closeness(verdict):
    ok = 0
    worst = 0.0
    for _, g, X, Y, s, t, f, seed in _battery():
        rep = mc_closeness(X, Y, f, s, t, 10**5, seed)
        bound = closeness_bound(Y.cardinality, s, t)
        ok += rep.monte_carlo_mean <= bound + 4 * rep.monte_carlo_stderr
        worst = max(worst, rep.monte_carlo_mean / bound)
    verdict(5, ok == 50, f"{ok}/50 within 2 sqrt(|Y|/st) + 4 se; max mean / bound = {worst:.3f}", 300)


def _recheck_ST(w, X, Y, f, s, t, N):
    op = oracles.add_mod(N)
    v = f.values
    xs, ys = X.elements.tolist(), Y.elements.tolist()
    Ss, Ts = w.S.elements.tolist(), w.T.elements.tolist()
    if not (set(Ss) <= set(xs) and set(Ts) <= set(ys) and len(Ss) == s and len(Ts) == t):
        return False
    ip = lambda P, Q: Fraction(sum(int(v[op(a, b)]) for a in P for b in Q), len(P) * len(Q))  # noqa: E731
    gap = ip(Ss, Ts) - ip(xs, ys)
    close = gap * gap * s * t <= 36 * len(ys)
    E_ST, E_XY = oracles.energy(Ss, Ts, op), oracles.energy(xs, ys, op)
    lhs = Fraction(E_ST, N**3)
    rhs = Fraction(3 * s * t, N**3) + Fraction(3 * s * s * t * t, len(xs) ** 2 * len(ys) ** 2) * Fraction(E_XY, N**3)
    return close and lhs <= rhs


def test_criterion_06_find_ST(verdict):
    N = 256
    g = make_group("cyclic", N)
    full = SubsetMask.full(g)
    attempts = accepted = rechecked = clamped = 0
    for i in range(100):
        rng = Seed(6, i).rng()
        mx = int(rng.integers(32, 129))
        my = int(rng.integers(mx, 2 * mx + 1))
        X = random_fixed_size_subset(full, mx, rng)
        Y = random_fixed_size_subset(full, my, rng)
        f = SignedIndicator.from_mask(random_subset_density_half(g, rng))
        s_target = int(rng.integers(8, mx))
        eps = (2000 * math.log(N) / s_target) ** 0.25
        params = choose_params(N, 1e5 / eps**6, mx, my)
        clamped += params.clamped
        try:
            w = find_ST(X, Y, f, params, 100, rng)
        except FindSTFailure as e:
            attempts += e.attempts
            continue
        attempts += w.attempts
        accepted += 1
        rechecked += _recheck_ST(w, X, Y, f, params.s, params.t, N)
    rate = accepted / attempts
    verdict(6, clamped == 0 and rate >= 1 / 3 - 0.1 and rechecked == accepted,
            f"acceptance {accepted}/{attempts} = {rate:.3f} (floor {1 / 3 - 0.1:.3f}), "
            f"rechecked {rechecked}/{accepted}, clamped {clamped}", 300)


def test_criterion_07_binomial_tails(verdict):
    eps_grid = [k / 100 for k in range(5, 50, 5)]
    violations = 0
    parts = []
    for eps in eps_grid:
        s = sweep_summary(eps, 5000)
        violations += s.violations
        grid = [c.lower_slack for c in tail_sweep(eps, 5000) if c.n % 100 == 0]
        parts.append(f"eps={eps:g}: slack max {s.max_lower_slack:.3f} at n={s.argmax_n}, grid max {max(grid):.3f}")
        assert math.isfinite(s.max_lower_slack)
    verdict(7, violations == 0, f"{violations} violations over n <= 5000; " + "; ".join(parts), 120)


def test_criterion_08_subspace_counts(verdict):
    bad = checked = 0
    for n in range(1, 7):
        for k in range(n + 1):
            I, lower = count_Ik(n, k)
            bad += I < lower
            total = 0
            for l in range(k + 1):
                J, upper = count_Jkl(n, k, l, mode="exact")
                bad += J > upper
                total += J
                checked += 1
            bad += total != I * I
    verdict(8, bad == 0, f"{checked} (n, k, l) triples, {bad} failures", 120)


def test_criterion_09_covariance(verdict):
    worst = Fraction(0)
    bad = 0
    for k in (4, 6, 8, 10):
        for eps in (0.1, 0.2, 0.3):
            t = covariance_terms(None, k, eps)
            bad += not t.ratio <= t.reference
            worst = max(worst, t.ratio / t.reference)
    verdict(9, bad == 0, f"12 cases, max ratio / (1/2 + eps)^2 = {float(worst):.4f}", 60)


def test_criterion_10_second_moment(verdict):
    cfg = SecondMomentConfig(n=12, c=1, epsilon=0.18, trials=200, seed=10, mode="sampled")
    rep = second_moment_experiment(cfg)
    fields = {"k", "K", "H", "feasible", "trials", "zero_count", "p_zero_hat", "wilson_low", "wilson_high", "reference"}
    ok = fields <= set(rep) and rep["trials"] == 200 and cfg.feasible and len(rep["records"]) == 200
    verdict(10, ok, f"k={rep['k']}, P(X=0) = {rep['p_zero_hat']:.3f} "
            f"[{rep['wilson_low']:.3f}, {rep['wilson_high']:.3f}] vs reference {rep['reference']:.4f} (observational)", 1800)


@pytest.mark.slow
def test_criterion_11_trend_probe(verdict):
    medians = {}
    for N in (2**8, 2**10, 2**12):
        g = make_group("cyclic", N)
        floor = math.ceil(math.log(N) ** 2)
        found = []
        for i in range(20):
            A = random_subset_density_half(g, Seed(11, N * 100 + i))
            out = worst_pair_search(A, floor, floor, method="anneal", budget=50_000, seed=Seed(111, N * 100 + i))
            found.append(out.best_deviation)
        medians[N] = statistics.median(found)
    m = [medians[N] for N in sorted(medians)]
    ok = all(a >= b for a, b in zip(m, m[1:]))
    verdict(11, ok, "median found deviation " + ", ".join(f"N={N}: {v:.4f}" for N, v in medians.items()), 1800)


@pytest.mark.slow
def test_criterion_12_extractor_oracle(verdict):
    p = 17
    A = quadratic_residues(p)
    cert = certify_extractor(A, 0.55, 0.9, mode="exhaustive", budget=10**8)
    prod = (np.arange(p)[:, None] + np.arange(p)[None, :]) % p
    dev, xs, ys = oracles.brute_force_worst_pair(prod, A.bits, cert.k_min)
    X, Y = cert.worst_source_pair
    cert_dev = oracles.deviation(X.support.elements.tolist(), Y.support.elements.tolist(), A.elements.tolist(), oracles.add_mod(p))
    ok = cert.k_min == 5 and dev == cert.worst_deviation == cert_dev
    verdict(12, ok, f"k_min={cert.k_min}, certificate {cert.worst_deviation}, brute force {dev}, verdict {cert.verdict}", 600)


def test_criterion_13_von_neumann(verdict):
    from paleylab.extractor import von_neumann_bias

    parts, ok = [], True
    for q in (0.1, 0.3, 0.5, 0.7, 0.9):
        p, se = von_neumann_bias(q, 10**5, Seed(13, int(q * 10)))
        ok &= abs(p - 0.5) <= 4 * se
        parts.append(f"q={q}: {p:.4f} +- {se:.4f}")
    verdict(13, ok, "; ".join(parts), 60)


def test_criterion_14_er_control(verdict):
    n, size, draws = 2**10, 200, 1000
    within = 0
    for i in range(draws):
        perm = Seed(14, i).rng().permutation(n)
        dev = er_bipartite_deviation(n, Seed(140, i), perm[:size], perm[size : 2 * size])
        within += dev <= er_envelope(size, size)
    verdict(14, within >= 0.99 * draws, f"{within}/{draws} draws within the 5-sigma envelope", 120)
