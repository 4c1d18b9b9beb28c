"""Command-line entry point: ``liyorke list | analyze | theorems``.

Exit codes: 0 success (all checks pass), 1 a theorem check failed,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import __version__, kernels
from . import metrics as M
from .analysis import AnalysisConfig
from .harness import SCALES, run_theorem_suite
from .report import SECTIONS, run_analysis, theorem_report, to_csv, to_json
from .systems import ConfigurationError, catalog, system_by_name

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(msg: str) -> int:
    print(f"liyorke: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def cmd_list(args) -> int:
    if args.metrics:
        items = [m.descriptor() for m in M.metric_catalog()]
    else:
        items = [s.descriptor() for s in catalog()]
    if args.json:
        sys.stdout.write(json.dumps(items, indent=2) + "\n")
        return EXIT_OK
    for d in items:
        tags = ", ".join(d.get("tags", []))
        print(f"{d['name']:<22} {d['kind']:<14} {tags}".rstrip())
    return EXIT_OK


def cmd_analyze(args) -> int:
    try:
        system = system_by_name(args.system)
    except (KeyError, ValueError):
        return _fail(f"unknown system {args.system!r} (see `liyorke list`)")
    try:
        metric = M.metric_by_name(args.metric)
    except (KeyError, ValueError):
        return _fail(f"unknown metric {args.metric!r} (see `liyorke list --metrics`)")
    sections = [s.strip() for s in args.sections.split(",") if s.strip()]
    bad = [s for s in sections if s not in SECTIONS]
    if bad or not sections:
        return _fail(f"sections must be drawn from {', '.join(SECTIONS)}")
    try:
        config = AnalysisConfig(horizon=args.horizon, burn_in=args.burn_in, eps=args.eps,
                                delta=args.delta, pairs=args.pairs, seed=args.seed)
        doc = run_analysis(system, metric, config, sections=sections,
                           grid_step=args.grid_step, tol=args.tol,
                           profile_points=args.profile_points, target=args.target,
                           budget=args.budget, wm_k=args.wm_k, wm_horizon=args.wm_horizon,
                           wm_samples=args.wm_samples, wm_threshold=args.wm_threshold,
                           threads=args.threads)
    except ConfigurationError as e:
        return _fail(str(e))
    _emit(to_json(doc) if args.format == "json" else to_csv(doc), args.out)
    return EXIT_OK


def cmd_theorems(args) -> int:
    override = None
    if args.metric_override:
        try:
            override = M.metric_by_name(args.metric_override)
        except (KeyError, ValueError):
            return _fail(f"unknown metric {args.metric_override!r}")
    checks = run_theorem_suite(args.seed, args.scale, args.threads, override)
    doc = theorem_report(checks, args.seed, args.scale, override)
    _emit(to_json(doc) if args.format == "json" else to_csv(doc), args.out)
    for c in checks:
        print(f"{c.id} {c.observed:<4} {c.title}", file=sys.stderr)
    failed = doc["summary"]["failed"]
    print(f"{doc['summary']['passed']}/{len(checks)} checks passed"
          + (f"; failed: {', '.join(failed)}" if failed else ""), file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="liyorke", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version",
                   version=f"liyorke {__version__} ({kernels.BACKEND} kernels)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("list", help="catalog of systems (or metrics) with tags")
    q.add_argument("--metrics", action="store_true")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=cmd_list)

    a = sub.add_parser("analyze", help="estimate Li-Yorke statistics for one system and metric")
    a.add_argument("--system", required=True)
    a.add_argument("--metric", required=True)
    a.add_argument("--horizon", type=int, default=10_000)
    a.add_argument("--burn-in", type=int, default=None)
    a.add_argument("--pairs", type=int, default=1000)
    a.add_argument("--eps", type=float, default=0.01)
    a.add_argument("--delta", type=float, default=0.1)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--grid-step", type=float, default=0.05)
    a.add_argument("--tol", type=float, default=0.01)
    a.add_argument("--sections", default="density",
                   help=f"comma-separated subset of {','.join(SECTIONS)}")
    a.add_argument("--profile-points", type=int, default=10)
    a.add_argument("--target", type=int, default=10, help="scrambled-set size")
    a.add_argument("--budget", type=int, default=1000, help="scrambled-set candidates")
    a.add_argument("--wm-k", type=int, default=8)
    a.add_argument("--wm-horizon", type=int, default=64)
    a.add_argument("--wm-samples", type=int, default=10_000)
    a.add_argument("--wm-threshold", type=float, default=0.03)
    a.add_argument("--format", choices=("json", "csv"), default="json")
    a.add_argument("--out")
    a.add_argument("--threads", type=int, default=1)
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("theorems", help="run the theorem check suite")
    t.add_argument("--scale", choices=sorted(SCALES), default="quick")
    t.add_argument("--seed", type=int, default=7)
    t.add_argument("--metric-override")
    t.add_argument("--format", choices=("json", "csv"), default="json")
    t.add_argument("--out")
    t.add_argument("--threads", type=int, default=1)
    t.set_defaults(func=cmd_theorems)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        return _fail("--threads must be positive")
    if getattr(args, "seed", 0) < 0:
        return _fail("--seed must be non-negative")
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
