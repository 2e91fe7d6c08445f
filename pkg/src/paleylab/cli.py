"""``lab``: command-line front end for the experiments.

Every run emits a JSON-lines report (config line, one line per record,
summary line).  Exit status is 0 when the run completes with a true (or no)
verdict, 2 when the verdict is false and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
import time
from fractions import Fraction

from . import __version__
from .discrepancy import discrepancy_report, er_bipartite_deviation, er_envelope
from .extractor import certify_extractor, von_neumann_bias
from .fourier import (
    cauchy_schwarz_intermediate,
    character_sum,
    fourier_discrepancy_bound,
    gauss_sum_profile,
    quadratic_character,
)
from .groups import (
    CYCLIC,
    BOOLEAN_CUBE,
    Seed,
    SignedIndicator,
    SubsetMask,
    make_group,
    quadratic_residues,
    random_fixed_size_subset,
    random_subset_density_half,
    require_odd_prime,
)
from .reporting import RunReport, dumps, job_map
from .search import AnnealSchedule, worst_pair_search
from .subsample import choose_params, find_ST, FindSTFailure, mc_closeness, mc_expected_energy
from .subspace import (
    SecondMomentConfig,
    count_Ik,
    count_Jkl,
    covariance_terms,
    dense_subspace_search,
    dense_threshold,
    enumerate_subspaces,
    gaussian_binomial,
    second_moment_experiment,
    sumset_contained,
    sumset_search,
)
from .tail_bounds import (
    binomial_bounds_check,
    binomial_certificate,
    h,
    hoeffding_monte_carlo,
    main_union_bound,
    sweep_summary,
    tail_sweep,
)
from .tolerances import TOL

# random streams under one master seed
STREAM_A, STREAM_X, STREAM_Y, STREAM_SEARCH, STREAM_MC, STREAM_SUMSET, STREAM_ER = range(1, 8)

# argparse bookkeeping that never appears in a config file
_INTERNAL = {"func", "command", "action", "config"}


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def job_seed(master: int, stream: int, index: int = 0) -> Seed:
    return Seed(master, (stream << 32) | index)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_group(spec: str):
    """``cyclic:N``, ``cube:n`` or ``paley:p``; returns (group, default A or None)."""
    kind, _, param = spec.partition(":")
    if not param:
        raise UsageError(f"group spec {spec!r} needs a parameter, e.g. cyclic:101")
    try:
        value = int(param)
    except ValueError:
        raise UsageError(f"group parameter {param!r} is not an integer") from None
    if kind == "paley":
        p = require_odd_prime(value)
        return make_group(CYCLIC, p), quadratic_residues(p)
    return make_group(kind, value), None


def parse_int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def parse_grid(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma list; steps are taken in exact decimals."""
    if ":" not in text:
        return [float(v) for v in text.split(",")]
    lo, hi, step = (Fraction(v) for v in text.split(":"))
    if step <= 0:
        raise UsageError("grid step must be positive")
    out, v = [], lo
    while v <= hi:
        out.append(float(v))
        v += step
    return out


def as_budget(value, default: int) -> int:
    return default if value is None else int(float(value))


def resolve_A(group, default_A, args, index: int = 0) -> SubsetMask:
    if getattr(args, "A", None):
        return SubsetMask.from_elements(group, parse_int_list(args.A))
    if default_A is not None and args.A_seed is None:
        return default_A
    master = args.seed if args.A_seed is None else args.A_seed
    return random_subset_density_half(group, job_seed(master, STREAM_A, index))


def resolve_subset(group, text: str, seed: Seed) -> SubsetMask:
    """Comma list of elements, ``random:k`` (uniform k-subset) or ``all``."""
    if text == "all":
        return SubsetMask.full(group)
    if text.startswith("random:"):
        return random_fixed_size_subset(SubsetMask.full(group), int(text.split(":", 1)[1]), seed)
    return SubsetMask.from_elements(group, parse_int_list(text))


def _median(values):
    return statistics.median(values) if values else None


# ---------------------------------------------------------------------------
# discrepancy / search


def cmd_discrepancy(args):
    group, default_A = parse_group(args.group)
    A = resolve_A(group, default_A, args)
    X = resolve_subset(group, args.X, job_seed(args.seed, STREAM_X))
    Y = resolve_subset(group, args.Y, job_seed(args.seed, STREAM_Y))
    rep = discrepancy_report(X, Y, A)
    rec = {"A_size": A.cardinality, "x_size": X.cardinality, "y_size": Y.cardinality} | rep.to_json()
    verdict = None
    if group.is_abelian_structured:
        f = SignedIndicator.from_mask(A)
        lhs = abs(character_sum(X, Y, f))
        bound = fourier_discrepancy_bound(X, Y, f)
        rec |= {"signed_sum_abs": lhs, "fourier_bound": bound, "fourier_bound_holds": lhs <= bound * (1 + TOL.bound_rel)}
        verdict = rec["fourier_bound_holds"]
    if args.eps is not None:
        rec["epsilon"] = args.eps
        rec["epsilon_extracted"] = Fraction(abs(rep.normalized_inner), 2) <= Fraction(repr(args.eps))
        verdict = rec["epsilon_extracted"]
    return [rec], {"epsilon_extracted_at": rec["epsilon_extracted_at"]}, verdict


def _search_job(cfg: dict, instance: int) -> list[dict]:
    group, default_A = parse_group(cfg["group"])
    args = argparse.Namespace(**cfg)
    A = resolve_A(group, default_A, args, instance)
    N = group.size
    floor = math.ceil(math.log(N) ** 2)
    mx = min(cfg["min_x"] or floor, N)
    my = min(cfg["min_y"] or floor, N)
    budget = as_budget(cfg["budget"], 100_000)
    schedule = AnnealSchedule(restarts=cfg["restarts"])
    out = []
    for method in cfg["method"].split(","):
        res = worst_pair_search(A, mx, my, method=method, budget=budget,
                                seed=job_seed(cfg["seed"], STREAM_SEARCH, instance), schedule=schedule)
        out.append({"instance": instance, "N": N, "A_size": A.cardinality, "min_x": mx, "min_y": my} | res.to_json())
    return out


def cmd_search(args):
    cfg = _job_config(args)
    runs = job_map(args.threads)(_search_job, [cfg] * args.instances, range(args.instances))
    records = [r for run in runs for r in run]
    agg = {}
    for method in args.method.split(","):
        devs = [r["best_deviation"] for r in records if r["method"] == method]
        agg[method] = {"max_deviation": max(devs), "median_deviation": _median(devs), "instances": len(devs)}
    return records, agg, None


# ---------------------------------------------------------------------------
# fourier


def cmd_fourier_gauss(args):
    p = require_odd_prime(args.p)
    moduli = gauss_sum_profile(p)
    target = p**-0.5
    records = [{"r": r, "modulus": float(moduli[r]), "deviation": abs(float(moduli[r]) - target)} for r in range(p)]
    worst = max(rec["deviation"] for rec in records[1:])
    agg = {"p": p, "target": target, "max_deviation": worst, "chi_hat_0": float(moduli[0])}
    return records, agg, worst <= TOL.gauss_modulus and float(moduli[0]) <= TOL.gauss_zero


def cmd_fourier_bound(args):
    p = require_odd_prime(args.p)
    group = make_group(CYCLIC, p)
    chi = quadratic_character(p).values
    sizes = parse_int_list(args.sizes)
    lo, hi = (sizes[0], sizes[0]) if len(sizes) == 1 else (min(sizes), max(sizes))
    if not 1 <= lo <= hi <= p:
        raise UsageError(f"sizes must lie in [1, {p}]")
    full = SubsetMask.full(group)
    records = []
    for i in range(args.trials):
        rng = job_seed(args.seed, STREAM_MC, i).rng()
        X = random_fixed_size_subset(full, int(rng.integers(lo, hi + 1)), rng)
        Y = random_fixed_size_subset(full, int(rng.integers(lo, hi + 1)), rng)
        lhs = abs(character_sum(X, Y, chi))
        bound = fourier_discrepancy_bound(X, Y, chi)
        cs = cauchy_schwarz_intermediate(X, Y, chi)
        records.append({
            "trial": i, "x_size": X.cardinality, "y_size": Y.cardinality, "lhs": lhs,
            "bound": bound, "closed_form": math.sqrt(p * X.cardinality * Y.cardinality),
            "cs_intermediate": cs,
            "ok": lhs <= bound * (1 + TOL.bound_rel) and lhs <= cs * (1 + TOL.bound_rel),
        })
    violations = sum(not r["ok"] for r in records)
    return records, {"p": p, "trials": args.trials, "violations": violations}, violations == 0


# ---------------------------------------------------------------------------
# subsample


def cmd_subsample_check(args):
    group, default_A = parse_group(args.group)
    full = SubsetMask.full(group)
    X = random_fixed_size_subset(full, args.x_size, job_seed(args.seed, STREAM_X))
    Y = random_fixed_size_subset(full, args.y_size, job_seed(args.seed, STREAM_Y))
    f = SignedIndicator.from_mask(resolve_A(group, default_A, args))
    params = choose_params(group.size, args.w, X.cardinality, Y.cardinality)
    s = params.s if args.s is None else args.s
    t = params.t if args.t is None else args.t
    lem1 = mc_expected_energy(X, Y, s, t, args.trials, job_seed(args.seed, STREAM_MC, 0))
    lem2 = mc_closeness(X, Y, f, s, t, args.trials, job_seed(args.seed, STREAM_MC, 1))
    records = [
        {"check": "params", "s_used": s, "t_used": t} | params.to_json(),
        {"check": "lemma_energy"} | lem1.to_json(),
        {"check": "lemma_closeness"} | lem2.to_json(),
    ]
    try:
        w = find_ST(X, Y, f, params, args.max_attempts, job_seed(args.seed, STREAM_MC, 2))
        records.append({"check": "find_ST", "accepted": True} | w.to_json())
        cert = main_union_bound(group.size, params.epsilon, params.t, float(w.energy_ratio))
        records.append({"check": "union_bound"} | cert.to_json())
    except FindSTFailure as e:
        records.append({"check": "find_ST", "accepted": False, "attempts": e.attempts,
                        "closeness_rate": e.closeness_rate, "energy_rate": e.energy_rate})
    ok = lem1.within_mc_tolerance and lem1.below_rhs and lem2.within_mc_tolerance
    return records, {"lemma_energy_ok": lem1.within_mc_tolerance and lem1.below_rhs,
                     "lemma_closeness_ok": lem2.within_mc_tolerance, "clamped": params.clamped}, ok


# ---------------------------------------------------------------------------
# bounds


def cmd_bounds_binom(args):
    chk = binomial_bounds_check(args.n, args.eps)
    rec = chk.to_json()
    if chk.exact:
        rec["certificate"] = binomial_certificate(args.n, args.eps).to_json()
    return [rec], {"upper_holds": chk.upper_holds}, chk.upper_holds


def cmd_bounds_sweep(args):
    records, agg = [], {}
    for eps in parse_grid(args.eps_grid):
        checks = list(tail_sweep(eps, args.n_max))
        for c in checks:
            records.append({
                "epsilon": eps, "n": c.n, "threshold": c.threshold,
                "log_exact_tail": c.to_json()["log_exact_tail"], "log_upper_bound": -c.n * h(eps),
                "lower_slack": c.lower_slack, "upper_holds": c.upper_holds,
            })
        agg[repr(eps)] = sweep_summary(eps, args.n_max, checks).to_json()
    violations = sum(v["violations"] for v in agg.values())
    return records, {"violations": violations, "per_epsilon": agg}, violations == 0


def cmd_bounds_hoeffding(args):
    rec = hoeffding_monte_carlo(args.n, args.lam, args.trials, job_seed(args.seed, STREAM_MC))
    return [rec], {"ratio": rec["ratio"]}, None


def cmd_bounds_union(args):
    cert = main_union_bound(args.N, args.eps, args.t_size, args.ratio)
    return [cert.to_json()], {"applicable": cert.details["applicable"]}, cert.details["applicable"]


# ---------------------------------------------------------------------------
# subspaces and sumsets


def cmd_subspace_enum(args):
    budget = as_budget(args.budget, 2_000_000)
    records = [b.to_json() for b in enumerate_subspaces(args.n, args.k, budget)]
    expected = gaussian_binomial(args.n, args.k)
    distinct = len({tuple(r["rows"]) for r in records})
    agg = {"count": len(records), "gaussian_binomial": expected, "distinct": distinct}
    return records, agg, len(records) == expected == distinct


def cmd_subspace_count(args):
    ks = range(args.n + 1) if args.k is None else [args.k]
    records, ok = [], True
    for k in ks:
        Ik, lower = count_Ik(args.n, k)
        total = 0
        for l in range(k + 1):
            J, upper = count_Jkl(args.n, k, l, mode=args.mode)
            total += J
            ok &= J <= upper
            records.append({"k": k, "l": l, "I_k": Ik, "I_k_lower": lower, "J": J, "J_upper": upper})
        ok &= Ik >= lower and total == Ik * Ik
    return records, {"all_hold": ok}, ok


def cmd_subspace_experiment(args):
    cfg = SecondMomentConfig(args.n, args.c, args.eps, args.trials, args.seed, args.mode, args.samples)
    rep = second_moment_experiment(cfg, mapper=job_map(args.threads))
    records = rep.pop("records")
    rep.pop("config")
    return records, rep, None


def cmd_subspace_covariance(args):
    records = [covariance_terms(None, k, eps).to_json() for k in parse_int_list(args.k) for eps in parse_grid(args.eps)]
    ok = all(r["within_bound"] for r in records)
    return records, {"all_within_bound": ok}, ok


def cmd_subspace_dense(args):
    group = make_group(BOOLEAN_CUBE, args.n)
    A = resolve_A(group, None, args)
    wits = dense_subspace_search(A, args.k, args.eps, args.mode, args.samples, job_seed(args.seed, STREAM_MC),
                                 as_budget(args.budget, 2_000_000))
    records = [w.to_json() for w in wits]
    H = dense_threshold(args.k, args.eps)
    return records, {"witnesses": len(records), "H": H, "A_size": A.cardinality, "mode": args.mode}, None


def _sumset_job(cfg: dict, index: int) -> dict:
    group, default_A = parse_group(cfg["group"])
    A = resolve_A(group, default_A, argparse.Namespace(**cfg), index)
    res = sumset_search(A, cfg["target"], cfg["restarts"], job_seed(cfg["seed"], STREAM_SUMSET, index))
    return {"seed_index": index, "A_size": A.cardinality, "best_size": res.best.cardinality,
            "met_target": res.met_target, "contained": sumset_contained(res.best, A),
            "best": res.best.elements.tolist()}


def cmd_sumset(args):
    group, _ = parse_group(args.group)
    reference = 2 * math.log2(group.size)
    cfg = _job_config(args) | {"target": args.target or math.ceil(reference)}
    records = list(job_map(args.threads)(_sumset_job, [cfg] * args.seeds, range(args.seeds)))
    sizes = [r["best_size"] for r in records]
    agg = {"median_best_size": _median(sizes), "max_best_size": max(sizes), "mean_best_size": sum(sizes) / len(sizes),
           "reference_log2": reference, "target": cfg["target"], "met_fraction": sum(r["met_target"] for r in records) / len(records)}
    return records, agg, all(r["contained"] for r in records)


# ---------------------------------------------------------------------------
# extractor and ER


def cmd_extract_certify(args):
    group, default_A = parse_group(args.group)
    A = resolve_A(group, default_A, args)
    cert = certify_extractor(A, args.entropy_floor, args.c, args.mode, as_budget(args.budget, 10**8),
                             job_seed(args.seed, STREAM_SEARCH))
    return [cert.to_json()], {"verdict": cert.verdict, "label": cert.label}, cert.verdict


def cmd_extract_vn(args):
    p, se = von_neumann_bias(args.q, args.trials, job_seed(args.seed, STREAM_MC), args.length)
    ok = abs(p - 0.5) <= 4 * se
    return [{"q": args.q, "trials": args.trials, "p1": p, "stderr": se, "within_4_stderr": ok}], {"p1": p}, ok


def _er_job(cfg: dict, index: int) -> dict:
    s = job_seed(cfg["seed"], STREAM_ER, index)
    n, mx, my = cfg["n"], cfg["x_size"], cfg["y_size"]
    perm = s.rng(0).permutation(n)
    X = perm[:mx]
    Y = perm[mx : mx + my] if cfg["disjoint"] else s.rng(2).choice(n, my, replace=False)
    dev = er_bipartite_deviation(n, s.rng(1), X, Y)
    env = er_envelope(mx, my)
    return {"seed_index": index, "deviation": dev, "envelope": env, "within": dev <= env}


def cmd_er(args):
    if args.disjoint and args.x_size + args.y_size > args.n:
        raise UsageError("disjoint X and Y do not fit in n vertices")
    cfg = _job_config(args)
    records = list(job_map(args.threads)(_er_job, [cfg] * args.seeds, range(args.seeds)))
    frac = sum(r["within"] for r in records) / len(records)
    return records, {"within_fraction": frac, "max_deviation": max(r["deviation"] for r in records)}, frac >= 0.99


# ---------------------------------------------------------------------------
# parser


def _job_config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in _INTERNAL}


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=None, help="master seed (fallback: $LAB_SEED, then 0)")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--out", default=None, help="JSON-lines report path (default: stdout)")
    g.add_argument("--csv", default=None, help="flat CSV projection of the records")
    g.add_argument("--budget", default=None, help="evaluation / enumeration budget, e.g. 1e6")
    g.add_argument("--config", default=None, help="JSON file overriding flags field by field")
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _global_flags()
    p = _Parser(prog="lab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(parent, name, func, help_):
        q = parent.add_parser(name, parents=[glob], help=help_)
        q.set_defaults(func=func)
        return q

    def group_opts(q, default="cyclic:101"):
        q.add_argument("--group", default=default, help="cyclic:N, cube:n or paley:p")
        q.add_argument("--A-seed", dest="A_seed", type=int, default=None)
        q.add_argument("--A", default=None, help="explicit comma-separated A")

    q = leaf(sub, "discrepancy", cmd_discrepancy, "exact pair count, energy and deviation of one (X, Y)")
    group_opts(q)
    q.add_argument("--X", required=True, help="elements, random:k or all")
    q.add_argument("--Y", required=True)
    q.add_argument("--eps", type=float, default=None)

    q = leaf(sub, "search", cmd_search, "adversarial worst-pair search")
    group_opts(q, "cyclic:256")
    q.add_argument("--min-x", dest="min_x", type=int, default=None, help="default ceil(log^2 N)")
    q.add_argument("--min-y", dest="min_y", type=int, default=None)
    q.add_argument("--method", default="anneal", help="exhaustive, greedy, anneal (comma list allowed)")
    q.add_argument("--instances", type=int, default=1)
    q.add_argument("--restarts", type=int, default=4)

    fo = sub.add_parser("fourier", help="Gauss sums and Fourier bounds").add_subparsers(dest="action", required=True,
                                                                                       parser_class=_Parser)
    q = leaf(fo, "gauss", cmd_fourier_gauss, "moduli of the quadratic character transform")
    q.add_argument("--p", type=int, required=True)
    q = leaf(fo, "bound", cmd_fourier_bound, "character sums against the Fourier bound")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--trials", type=int, default=1000)
    q.add_argument("--sizes", default="2,8", help="lo,hi range of |X| and |Y|")

    ss = sub.add_parser("subsample", help="random subsampling checks").add_subparsers(dest="action", required=True,
                                                                                     parser_class=_Parser)
    q = leaf(ss, "check", cmd_subsample_check, "energy and closeness lemmas, then find (S, T)")
    group_opts(q, "cyclic:256")
    q.add_argument("--x-size", dest="x_size", type=int, required=True)
    q.add_argument("--y-size", dest="y_size", type=int, required=True)
    q.add_argument("--w", type=float, default=1e5)
    q.add_argument("--s", type=int, default=None, help="override the chosen s")
    q.add_argument("--t", type=int, default=None, help="override the chosen t")
    q.add_argument("--trials", type=int, default=10_000)
    q.add_argument("--max-attempts", dest="max_attempts", type=int, default=100)

    bo = sub.add_parser("bounds", help="tail certificates").add_subparsers(dest="action", required=True,
                                                                          parser_class=_Parser)
    q = leaf(bo, "binom", cmd_bounds_binom, "exact binomial tail against exp(-n h(eps))")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--eps", type=float, required=True)
    q = leaf(bo, "sweep", cmd_bounds_sweep, "tail check for n = 1..n-max over an eps grid")
    q.add_argument("--eps-grid", dest="eps_grid", default="0.05:0.45:0.05")
    q.add_argument("--n-max", dest="n_max", type=int, default=5000)
    q = leaf(bo, "hoeffding", cmd_bounds_hoeffding, "Monte Carlo of fair signs against the certificate")
    q.add_argument("--n", type=int, default=100)
    q.add_argument("--lam", type=float, default=3.0)
    q.add_argument("--trials", type=int, default=100_000)
    q = leaf(bo, "union", cmd_bounds_union, "union-bound arithmetic for one size class")
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--t-size", dest="t_size", type=int, required=True)
    q.add_argument("--ratio", type=float, required=True)

    su = sub.add_parser("subspace", help="subspaces of F_2^n").add_subparsers(dest="action", required=True,
                                                                              parser_class=_Parser)
    q = leaf(su, "enum", cmd_subspace_enum, "list k-subspaces in canonical form")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q = leaf(su, "count", cmd_subspace_count, "I_k and ordered J_k^(l) counts with their bounds")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, default=None)
    q.add_argument("--mode", default="auto", choices=["auto", "exact", "formula"])
    q = leaf(su, "experiment", cmd_subspace_experiment, "second-moment experiment")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--c", type=int, default=1)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--trials", type=int, default=200)
    q.add_argument("--mode", default="sampled", choices=["sampled", "exhaustive"])
    q.add_argument("--samples", type=int, default=4096)
    q = leaf(su, "covariance", cmd_subspace_covariance, "exact l = 0 covariance ratio")
    q.add_argument("--k", default="4,6,8,10", help="comma list of dimensions")
    q.add_argument("--eps", default="0.1,0.2,0.3")
    q = leaf(su, "dense", cmd_subspace_dense, "dense k-subspaces of a random A")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--eps", type=float, required=True)
    q.add_argument("--mode", default="exhaustive", choices=["sampled", "exhaustive"])
    q.add_argument("--samples", type=int, default=4096)
    q.add_argument("--A-seed", dest="A_seed", type=int, default=None)

    q = leaf(sub, "sumset", cmd_sumset, "greedy search for X with X + X inside A")
    group_opts(q, "cyclic:1024")
    q.add_argument("--restarts", type=int, default=50)
    q.add_argument("--seeds", type=int, default=100)
    q.add_argument("--target", type=int, default=None, help="default ceil(2 log2 N)")

    ex = sub.add_parser("extract", help="extractor evaluation").add_subparsers(dest="action", required=True,
                                                                              parser_class=_Parser)
    q = leaf(ex, "certify", cmd_extract_certify, "worst flat-source pair above an entropy floor")
    group_opts(q, "paley:17")
    q.add_argument("--entropy-floor", dest="entropy_floor", type=float, required=True)
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--mode", default="exhaustive", choices=["exhaustive", "search"])
    q = leaf(ex, "vn", cmd_extract_vn, "von Neumann extractor on Bernoulli(q) streams")
    q.add_argument("--q", type=float, required=True)
    q.add_argument("--trials", type=int, default=100_000)
    q.add_argument("--length", type=int, default=256)

    q = leaf(sub, "er", cmd_er, "Erdos-Renyi bipartite density control")
    q.add_argument("--n", type=int, default=1024)
    q.add_argument("--x-size", dest="x_size", type=int, default=200)
    q.add_argument("--y-size", dest="y_size", type=int, default=200)
    q.add_argument("--seeds", type=int, default=1000)
    q.add_argument("--overlap", dest="disjoint", action="store_false", help="draw Y independently of X")
    return p


def apply_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    with open(args.config) as fh:
        overrides = json.load(fh)
    if not isinstance(overrides, dict):
        parser.error("config file must hold a JSON object")
    known = set(vars(args)) - _INTERNAL
    for key, value in overrides.items():
        field = key.replace("-", "_")
        if field not in known:
            parser.error(f"unknown config field '{key}'")
        setattr(args, field, value)
    return args


def run(argv=None) -> int:
    parser = build_parser()
    args = apply_config(parser, parser.parse_args(argv))
    if args.seed is None:
        args.seed = int(os.environ.get("LAB_SEED", 0))
    t0 = time.perf_counter()
    try:
        records, aggregates, verdict = args.func(args)
    except (UsageError, ValueError, ArithmeticError, OSError) as e:
        print(f"lab: error: {e}", file=sys.stderr)
        return 1
    config = {"command": " ".join(v for v in (args.command, getattr(args, "action", None)) if v)} | _job_config(args)
    aggregates = dict(aggregates) | {"verdict": verdict}
    report = RunReport(config, records, aggregates, round(time.perf_counter() - t0, 6))
    if args.out:
        report.write_jsonl(args.out)
        print(dumps(report.aggregates))
    else:
        print("\n".join(report.lines()))
    if args.csv:
        report.write_csv(args.csv)
    return 2 if verdict is False else 0


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
