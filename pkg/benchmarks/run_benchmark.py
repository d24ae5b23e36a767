#!/usr/bin/env python3
"""Run the hypercolour desk-scale acceptance benchmark.

Every check compares the sampler (or the block-tree and coupling machinery)
against the exact oracle on small instances and reports pass/fail with the
measured statistic.

Usage:
    python benchmarks/run_benchmark.py [--only NAME ...] [--scale X] [--output FILE] [--progress]
"""
import argparse
import contextlib
import io
import json
import math
import os
import sys
import tempfile
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from scipy.stats import chisquare

# Ensure the package path is importable.
_HERE = os.path.dirname(os.path.abspath(__file__))
_PKG_PY = os.path.join(_HERE, "..", "python")
if _PKG_PY not in sys.path:
    sys.path.insert(0, _PKG_PY)

import hypercolour_cli
from hypercolour.assignments import UNSET, ProjectedConfig
from hypercolour.blocktree import audit_counts, audit_encodings, audit_generator
from hypercolour.coupling import maximal_coupling, mixing_curve, run_coupled_scan
from hypercolour.errors import EmptySupportError
from hypercolour.hypergraph import Hypergraph, format_instance, parse_instance, satisfied_mask, validate
from hypercolour.oracle import (
    ExactDistribution,
    conditional_distribution,
    local_uniformity_check,
    local_uniformity_precondition,
    tv_distance,
    vertex_marginals,
)
from hypercolour.projection import build
from hypercolour.sampler import SamplerOverrides, derive_params, run_batch, sample_subroutine, spawn_seeds
from hypercolour.workbench import GenSpec, generate_instance, graph_corpus

Report = Dict[str, Any]

# Largest conditional support the exactness check draws against.
MAX_EXACT_SUPPORT = 32

# Instances the end-to-end and coupling checks share (n <= 6, k = 3).
SMALL = [
    ("single-edge", validate([(0, 1, 2)], 3, 3)),
    ("two-edges", validate([(0, 1, 2), (1, 2, 3)], 4, 3)),
    ("triangle-6", validate([(0, 1, 2), (2, 3, 4), (1, 4, 5)], 6, 3)),
]


def _scaled(count: int, scale: float) -> int:
    return max(1, int(round(count * scale)))


def _random_condition(
    h: Hypergraph, q: int, rng: np.random.Generator, max_support: int = MAX_EXACT_SUPPORT
) -> Tuple[Tuple[int, ...], ProjectedConfig, ExactDistribution]:
    """A random S of at most three vertices and a random Y on V minus S.

    Redraws until the exact conditional law on S is nonempty with at most
    `max_support` outcomes, so 2e5 draws resolve it well inside the TV budget.
    """
    scheme = build(q)
    while True:
        size = int(rng.integers(1, min(3, h.n) + 1))
        subset = tuple(sorted(int(v) for v in rng.choice(h.n, size=size, replace=False)))
        values = rng.integers(1, scheme.s + 1, size=h.n).astype(np.int64)
        values[list(subset)] = UNSET
        y = ProjectedConfig(values, scheme.s)
        try:
            exact = conditional_distribution(h, scheme, subset, y)
        except EmptySupportError:
            continue
        if len(exact.support) <= max_support:
            return subset, y, exact


def _rejection_instance(job: Tuple[Hypergraph, int, Tuple[int, ...], ProjectedConfig, int, int]) -> Counter:
    h, q, subset, y, draws, seed = job
    scheme = build(q)
    params = derive_params(h, q, 0.1, SamplerOverrides(disable_guards=True))
    satisfied = satisfied_mask(h, y)
    rng = np.random.default_rng(seed)
    cols = list(subset)
    counts: Counter = Counter()
    for _ in range(draws):
        x = sample_subroutine(h, scheme, subset, y, params, rng, satisfied=satisfied).colouring.values
        counts[tuple(int(c) for c in x[cols])] += 1
    return counts


def check_rejection_exactness(scale: float = 1.0, seed: int = 0, instances: int = 20, workers: int = 1) -> Report:
    """Guard-free Sample against the exact conditional law on random n <= 8 instances."""
    draws = _scaled(200_000, scale)
    rng = np.random.default_rng(seed)
    jobs = []
    exacts = []
    for i in range(instances):
        n = int(rng.integers(5, 9))
        q = (3, 4)[i % 2]
        m = int(rng.integers(1, (2 * n) // 3 + 1))
        h = generate_instance(GenSpec(n=n, k=3, max_degree=2, m=m, seed=int(rng.integers(2**31))))
        subset, y, exact = _random_condition(h, q, rng)
        jobs.append((h, q, subset, y, draws, int(rng.integers(2**31))))
        exacts.append(exact)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_rejection_instance, jobs))
    else:
        results = [_rejection_instance(job) for job in jobs]

    rows = []
    for (h, q, subset, _, _, _), exact, counts in zip(jobs, exacts, results):
        rows.append({"n": h.n, "m": h.m, "q": q, "subset": list(subset), "support": len(exact.support),
                     "tv": tv_distance(counts, exact)})
    worst = max(r["tv"] for r in rows)
    return {"draws": draws, "instances": rows, "max_tv": worst, "threshold": 0.01, "passed": worst <= 0.01}


def check_marginal_fidelity(scale: float = 1.0, seed: int = 1, workers: int = 1, sweeps: int = 10) -> Report:
    """End-to-end per-vertex marginals of the guard-free scan against exact mu_v (q = 4)."""
    runs = _scaled(100_000, scale)
    rows = []
    for name, h in SMALL:
        exact = vertex_marginals(h, [range(1, 5)] * h.n)
        overrides = SamplerOverrides(steps=sweeps * h.n, disable_guards=True)
        reports = run_batch(h, 4, 0.1, spawn_seeds(seed, runs), overrides, workers=workers)
        samples = np.stack([r.colouring.values for r in reports])
        tvs = [tv_distance(Counter(int(c) for c in samples[:, v]), exact[v]) for v in range(h.n)]
        rows.append({"instance": name, "steps": overrides.steps, "max_tv": max(tvs)})
    worst = max(r["max_tv"] for r in rows)
    return {"runs": runs, "instances": rows, "max_tv": worst, "threshold": 0.015, "passed": worst <= 0.015}


def check_guard_fallback(scale: float = 1.0, seed: int = 2, workers: int = 1) -> Report:
    """componentCap = 0 with a single bucket makes every call fall back; output must be uniform."""
    runs = _scaled(100_000, scale)
    h = validate([(0, 1, 2), (1, 2, 3)], 4, 3)
    q = 3
    overrides = SamplerOverrides(steps=h.n, component_cap=0, s=1)
    reports = run_batch(h, q, 0.1, spawn_seeds(seed, runs), overrides, workers=workers)
    counts = Counter(tuple(int(c) for c in r.colouring.values) for r in reports)
    cells = [tuple(int(d) for d in np.unravel_index(i, (q,) * h.n)) for i in range(q**h.n)]
    observed = [counts.get(tuple(c + 1 for c in cell), 0) for cell in cells]
    pvalue = float(chisquare(observed).pvalue)
    fired = all(r.bad_com_count == h.n + 1 for r in reports)
    return {"runs": runs, "pvalue": pvalue, "threshold": 0.01, "every_call_fell_back": fired,
            "passed": pvalue >= 0.01 and fired}


def check_local_uniformity(seed: int = 3, instances: int = 30) -> Report:
    """Exact marginals inside the exp(+-2/r)/|Q_v| envelope on generated n <= 7 instances."""
    rng = np.random.default_rng(seed)
    checked = skipped = 0
    violations: List[Dict[str, Any]] = []
    for _ in range(instances):
        n = int(rng.integers(4, 8))
        h = generate_instance(GenSpec(n=n, k=3, max_degree=2, m=int(rng.integers(1, (2 * n) // 3 + 1)),
                                      seed=int(rng.integers(2**31))))
        lists = [sorted(int(c) for c in rng.choice(8, size=int(rng.integers(5, 7)), replace=False) + 1)
                 for _ in range(n)]
        r = 3.0
        if not local_uniformity_precondition(h, lists, r):
            skipped += 1
            continue
        report = local_uniformity_check(h, lists, r)
        checked += len(report.entries)
        violations.extend(report.to_dict()["violations"])
    return {"checked": checked, "skipped_instances": skipped, "violations": violations[:20],
            "passed": not violations and checked > 0}


def check_blocktrees(max_vertices: int = 9, seed: int = 4) -> Report:
    """Generator, encoding and counting audits over the graph corpus, theta in {1, 2, 3}."""
    failures = []
    checked = 0
    for name, g in graph_corpus(max_vertices, seed=seed):
        reports = [audit_counts(g)]
        for theta in (1, 2, 3):
            reports.append(audit_generator(g, theta, max_size=max_vertices))
            reports.append(audit_encodings(g, theta, max_ell=3))
        for rep in reports:
            checked += rep.checked
            if not rep.passed:
                failures.append({"graph": name, **rep.to_dict()})
    return {"checked": checked, "failures": failures[:10], "passed": not failures}


def check_coupling(scale: float = 1.0, seed: int = 5) -> Report:
    """Maximal-coupling disagreement vs TV, equal-start coalescence and monotone discrepancy curves."""
    draws = _scaled(100_000, scale)
    rng = np.random.default_rng(seed)
    worst_z = 0.0
    for _ in range(50):
        p = rng.dirichlet(np.ones(5))
        r = rng.dirichlet(np.ones(5))
        tv = tv_distance(dict(enumerate(p)), dict(enumerate(r)))
        rate = sum(x != y for x, y in (maximal_coupling(p, r, rng) for _ in range(draws))) / draws
        sigma = math.sqrt(max(tv * (1 - tv), 1e-12) / draws)
        worst_z = max(worst_z, abs(rate - tv) / sigma)
    coupling_ok = worst_z <= 3.0

    equal_ok = True
    monotone_ok = True
    runs = _scaled(2_000, scale)
    curves = []
    for i, (name, h) in enumerate(SMALL):
        start = [1] * h.n
        trace = run_coupled_scan(h, 4, start, start, 20 * h.n, seed=seed + i)
        equal_ok = equal_ok and all(not d for d in trace.discrepancies)

        points = [0, h.n, 2 * h.n, 4 * h.n, 8 * h.n]
        curve = mixing_curve(h, 4, 0.1, points, runs=runs, seed=seed + i, random_pairs=5)
        for v in range(h.n):
            for a, b in zip(points, points[1:]):
                ra, rb = curve.rate(a, v), curve.rate(b, v)
                if rb.rate > ra.rate + 2 * math.hypot(_floored(ra, runs), _floored(rb, runs)):
                    monotone_ok = False
        curves.append({"instance": name, "worst": {t: curve.worst(t) for t in points}})
    return {
        "draws": draws,
        "max_abs_z": worst_z,
        "coupling_matches_tv": coupling_ok,
        "equal_starts_never_diverge": equal_ok,
        "curves_non_increasing": monotone_ok,
        "curves": curves,
        "passed": coupling_ok and equal_ok and monotone_ok,
    }


def _floored(row: Any, runs: int) -> float:
    """Binomial stderr with the rate floored at one event, so a zero rate still carries noise."""
    p = max(row.rate, 1.0 / runs)
    return math.sqrt(p * (1.0 - p) / runs)


def _cli(argv: List[str]) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = hypercolour_cli.main(argv)
    if code != 0:
        raise RuntimeError(f"hypercolour {' '.join(argv)} exited {code}")
    return buf.getvalue()


def check_determinism(seed: int = 6) -> Report:
    """Byte-identical JSON/CSV under a fixed seed, and instance files that round-trip."""
    h = generate_instance(GenSpec(n=12, k=3, max_degree=2, m=6, seed=seed))
    text = format_instance(h, comment="determinism")
    round_trip = format_instance(parse_instance(text), comment="determinism") == text
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "inst.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        sample = ["sample", "--instance", path, "--q", "9", "--override-T", "60", "--runs", "3",
                  "--seed", str(seed), "--json"]
        coupling = ["coupling", "--instance", path, "--q", "9", "--T-max", "24", "--runs", "5",
                    "--pairs", "2", "--seed", str(seed)]
        sample_ok = _cli(sample) == _cli(sample)
        coupling_ok = _cli(coupling) == _cli(coupling)
    return {"instance_round_trip": round_trip, "sample_json_identical": sample_ok,
            "coupling_csv_identical": coupling_ok, "passed": round_trip and sample_ok and coupling_ok}


CHECKS: Dict[str, Callable[..., Report]] = {
    "rejection": check_rejection_exactness,
    "marginals": check_marginal_fidelity,
    "fallback": check_guard_fallback,
    "uniformity": check_local_uniformity,
    "blocktree": check_blocktrees,
    "coupling": check_coupling,
    "determinism": check_determinism,
}
_SCALED = {"rejection", "marginals", "fallback", "coupling"}
_POOLED = {"rejection", "marginals", "fallback"}


def main() -> int:
    parser = argparse.ArgumentParser(description="Run the hypercolour acceptance benchmark")
    parser.add_argument("--only", nargs="*", choices=sorted(CHECKS), default=None,
                        help="Run only these checks (default: all)")
    parser.add_argument("--scale", type=float, default=1.0,
                        help="Multiply sample counts by this factor; thresholds are unchanged")
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                        help="Worker processes for the pooled checks (default: all CPUs)")
    parser.add_argument("--output", default="", help="Write JSON report to file")
    parser.add_argument("--progress", action="store_true")
    args = parser.parse_args()

    report: Dict[str, Any] = {"checks": {}, "timing": {}}
    for name in args.only or list(CHECKS):
        kwargs: Dict[str, Any] = {}
        if name in _SCALED:
            kwargs["scale"] = args.scale
        if name in _POOLED:
            kwargs["workers"] = args.workers
        t0 = time.time()
        result = CHECKS[name](**kwargs)
        elapsed = time.time() - t0
        report["checks"][name] = result
        report["timing"][name] = round(elapsed, 2)
        if args.progress:
            print(f"{name}: {'PASS' if result['passed'] else 'FAIL'} in {elapsed:.1f}s", file=sys.stderr)

    report["passed"] = all(r["passed"] for r in report["checks"].values())
    output = json.dumps(report, indent=2, ensure_ascii=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(output)
        if args.progress:
            print(f"Report written to {args.output}", file=sys.stderr)
    else:
        print(output)

    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
