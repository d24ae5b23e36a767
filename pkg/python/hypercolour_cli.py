#!/usr/bin/env python3
import argparse
import json
import logging
import sys
import time
from typing import Any, Dict, List, Optional

import numpy as np

from hypercolour.blocktree import audit_counts, audit_encodings, audit_generator
from hypercolour.coupling import default_checkpoints, mixing_curve
from hypercolour.errors import HypercolourError, PreconditionUnmetError
from hypercolour.hypergraph import format_instance, line_graph, read_graph, read_instance
from hypercolour.oracle import empirical_marginals, local_uniformity_check, tv_distance, vertex_marginals
from hypercolour.projection import build
from hypercolour.sampler import SamplerOverrides, run_batch, run_scan, spawn_seeds
from hypercolour.workbench import GenSpec, bench_scan, generate_instance, graph_corpus, regime_check, regime_check_for

logger = logging.getLogger("hypercolour.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECK_FAILED = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_ERROR; 2 is reserved for failed checks."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _overrides(args: argparse.Namespace, disable_guards: bool) -> SamplerOverrides:
    return SamplerOverrides(
        steps=args.override_T,
        rejection_trials=args.override_R,
        component_cap=args.override_cap,
        s=args.s,
        disable_guards=disable_guards,
    )


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(n=args.n, k=args.k, max_degree=args.max_degree, m=args.m, seed=args.seed, simple=args.simple)
    h = generate_instance(spec)
    if args.json:
        _emit(args, _dumps({
            "n": h.n,
            "m": h.m,
            "k": h.k,
            "max_degree": h.max_degree,
            "simple": h.simple,
            "edges": [list(e) for e in h.edges],
        }))
    else:
        comment = f"hypercolour gen n={spec.n} k={spec.k} max_degree={spec.max_degree} m={spec.m} seed={spec.seed}"
        _emit(args, format_instance(h, comment=comment))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    h = read_instance(args.instance)
    overrides = _overrides(args, args.disable_guards)
    t0 = time.time()
    if args.runs == 1:
        reports = [run_scan(h, args.q, args.epsilon, seed=args.seed, overrides=overrides)]
    else:
        reports = run_batch(h, args.q, args.epsilon, spawn_seeds(args.seed, args.runs), overrides, workers=args.workers)
    elapsed = time.time() - t0

    if args.json:
        payload: Dict[str, Any] = {"runs": [r.to_dict() for r in reports]}
        if args.timing:
            payload["seconds"] = round(elapsed, 3)
        _emit(args, _dumps(payload))
    else:
        lines = []
        for r in reports:
            lines.append(" ".join(str(int(c)) for c in r.colouring.values))
            lines.append(f"# seed={r.seed} steps={r.steps} bad_com={r.bad_com_count} "
                         f"bad_rej={r.bad_rej_count} final_flag={r.final_flag or '-'}")
        if args.timing:
            lines.append(f"# {elapsed:.3f}s")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Compare sampled per-vertex colour marginals with exact ones."""
    h = read_instance(args.instance)
    q = args.q
    lists = [range(1, q + 1)] * h.n
    exact = vertex_marginals(h, lists)
    overrides = _overrides(args, not args.guards)
    reports = run_batch(h, q, args.epsilon, spawn_seeds(args.seed, args.samples), overrides, workers=args.workers)
    samples = np.stack([r.colouring.values for r in reports])
    empirical = empirical_marginals(samples, q)
    tvs = [tv_distance(e, x) for e, x in zip(empirical, exact)]

    r = args.r if args.r is not None else float(max(h.k, 2))
    try:
        uniformity = local_uniformity_check(h, lists, r)
        uniformity_status = "pass" if uniformity.passed else "fail"
        uniformity_detail: Optional[Dict[str, Any]] = uniformity.to_dict()
    except PreconditionUnmetError as exc:
        logger.warning("local uniformity skipped: %s", exc)
        uniformity_status = "skipped"
        uniformity_detail = None

    max_tv = max(tvs, default=0.0)
    passed = max_tv <= args.tolerance and uniformity_status != "fail"
    payload = {
        "tv_marginals": tvs,
        "max_tv": max_tv,
        "tolerance": args.tolerance,
        "local_uniformity": uniformity_status,
        "local_uniformity_detail": uniformity_detail,
        "counts": {
            "proper": exact[0].total if exact else 1,
            "assignments": q**h.n,
            "samples": args.samples,
            "bad_com": sum(rep.bad_com_count for rep in reports),
            "bad_rej": sum(rep.bad_rej_count for rep in reports),
        },
        "passed": passed,
    }
    if args.json:
        _emit(args, _dumps(payload))
    else:
        _emit(args, f"max_tv={max_tv:.6f} tolerance={args.tolerance} local_uniformity={uniformity_status} "
                    f"{'PASS' if passed else 'FAIL'}\n")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_blocktree(args: argparse.Namespace) -> int:
    if args.graph:
        graphs = [(args.graph, read_graph(args.graph))]
    elif args.instance:
        graphs = [(args.instance, line_graph(read_instance(args.instance)).graph)]
    else:
        graphs = graph_corpus(args.max_size, seed=args.seed)

    results = []
    for name, g in graphs:
        if args.check == "generate":
            report = audit_generator(g, args.theta, max_size=args.max_size)
        elif args.check == "inject":
            report = audit_encodings(g, args.theta, max_ell=args.max_ell)
        else:
            report = audit_counts(g, max_ell=args.max_ell)
        logger.info("%s: %s checked=%d passed=%s", name, report.name, report.checked, report.passed)
        results.append({"graph": name, **report.to_dict()})

    passed = all(r["passed"] for r in results)
    if args.json:
        _emit(args, _dumps({"check": args.check, "theta": args.theta, "passed": passed, "graphs": results}))
    else:
        lines = [f"{r['graph']}: {'PASS' if r['passed'] else 'FAIL'} ({r['checked']} checked)" for r in results]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_coupling(args: argparse.Namespace) -> int:
    h = read_instance(args.instance)
    checkpoints = args.checkpoints or default_checkpoints(args.t_max, h.n)
    scheme = build(args.q, args.s)
    curve = mixing_curve(
        h,
        args.q,
        args.epsilon,
        checkpoints,
        args.runs,
        seed=args.seed,
        random_pairs=args.pairs,
        scheme=scheme,
        workers=args.workers,
    )
    _emit(args, _dumps(curve.to_dict()) if args.json else curve.to_csv())
    return EXIT_OK


def cmd_regime(args: argparse.Namespace) -> int:
    if args.instance:
        report = regime_check(read_instance(args.instance), args.q, args.delta, args.alpha, args.epsilon)
    else:
        if args.n is None or args.k is None or args.max_degree is None:
            raise HypercolourError("regime needs --instance or all of --n, --k, --max-degree")
        report = regime_check_for(args.n, args.k, args.q, args.max_degree, args.delta, args.alpha, args.epsilon)
    if args.json:
        _emit(args, _dumps(report.to_dict()))
    else:
        _emit(args, f"k: {report.k_status} (>= {report.k_threshold:g})  "
                    f"q: {report.q_status} (>= {report.q_threshold:g})  theta={report.theta}\n")
    return EXIT_OK if report.in_regime else EXIT_CHECK_FAILED


def cmd_bench(args: argparse.Namespace) -> int:
    rows = bench_scan(args.sizes, k=args.k, q=args.q, max_degree=args.max_degree, epsilon=args.epsilon, seed=args.seed)
    if args.json:
        _emit(args, _dumps({"rows": rows}))
    else:
        lines = [f"n={r['n']} steps={r['steps']} {r['seconds']}s" for r in rows]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def _int_list(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Root random seed (default 0)")
    common.add_argument("--json", action="store_true", help="Emit JSON instead of text")
    common.add_argument("--out", default="", help="Write output to this file instead of stdout")
    common.add_argument("--verbose", action="store_true", help="Debug logging on stderr")

    sampler_flags = argparse.ArgumentParser(add_help=False)
    sampler_flags.add_argument("--epsilon", type=float, default=0.1)
    sampler_flags.add_argument("--override-T", dest="override_T", type=int, default=None)
    sampler_flags.add_argument("--override-R", dest="override_R", type=int, default=None)
    sampler_flags.add_argument("--override-cap", dest="override_cap", type=int, default=None)
    sampler_flags.add_argument("--s", type=int, default=None, help="Image size override (default ceil(sqrt(q)))")
    sampler_flags.add_argument("--workers", type=int, default=1)

    parser = _Parser(prog="hypercolour", description="Projected-scan hypergraph colouring sampler")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="Generate a random k-uniform instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-degree", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--simple", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sample", parents=[common, sampler_flags], help="Run the projected systematic scan")
    p.add_argument("--instance", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--disable-guards", action="store_true")
    p.add_argument("--timing", action="store_true", help="Include wall-clock time in the output")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", parents=[common, sampler_flags], help="Check sampled marginals against exact ones")
    p.add_argument("--instance", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--r", type=float, default=None, help="Envelope parameter for the local-uniformity check")
    p.add_argument("--guards", action="store_true", help="Keep both guards on (default: disabled)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("blocktree", parents=[common], help="Exhaustive 2-block-tree checks")
    p.add_argument("--graph", default="")
    p.add_argument("--instance", default="", help="Use the line graph of this instance")
    p.add_argument("--theta", type=int, default=1)
    p.add_argument("--check", choices=("generate", "inject", "counts"), default="generate")
    p.add_argument("--max-size", type=int, default=9)
    p.add_argument("--max-ell", type=int, default=3)
    p.set_defaults(func=cmd_blocktree)

    p = sub.add_parser("coupling", parents=[common], help="Empirical mixing curve of the coupled scan")
    p.add_argument("--instance", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--T-max", dest="t_max", type=int, required=True)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--pairs", type=int, default=10, help="Random initial pairs besides the constant pair")
    p.add_argument("--checkpoints", type=_int_list, default=None, help="Comma-separated step counts")
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("regime", parents=[common], help="Evaluate the fast-sampling regime conditions")
    p.add_argument("--instance", default="")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--max-degree", type=int, default=None)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.set_defaults(func=cmd_regime)

    p = sub.add_parser("bench", parents=[common], help="Time run_scan on generated instances")
    p.add_argument("--sizes", type=_int_list, default=[50, 100, 200])
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--q", type=int, default=16)
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # HypercolourError is a ValueError; plain ones come from numpy on bad input.
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
