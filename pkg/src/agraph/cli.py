"""Command-line front end: ``agraph generate|simulate|query|report``.

Exit codes: 0 success (including an empty sweep), 2 configuration error,
3 query error, 4 partial simulation failure.
"""

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .bundled import bundled_design_dir
from .descriptions import load_design
from .errors import AGraphError, DescriptionError, RetrievalError, UnknownNode
from .graph import AGraph
from .pipeline import build_report, generate, report_csv, simulate_manifest
from .rational import format_value, rational_text
from .retrieval import Scope, query_metric

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_QUERY = 3
EXIT_PARTIAL = 4


def _err(msg):
    print(f"agraph: {msg}", file=sys.stderr)


def _design_path(text):
    path = Path(text)
    if path.exists():
        return path
    bundled = bundled_design_dir(text)
    if bundled is not None:
        return bundled
    return path


def cmd_generate(args):
    design = load_design(_design_path(args.design))
    result = generate(design, args.out, force=args.force, max_points=args.max_points)
    for d in result.diagnostics:
        _err(f"warning: empty sweep: {d}")
    n = len(result.points)
    print(f"{n} design point{'s' if n != 1 else ''} written to {Path(args.out) / 'manifest.desc'}")
    return EXIT_OK


def cmd_simulate(args):
    statuses = simulate_manifest(args.manifest, args.out, parallel=args.parallel)
    failed = [s for s in statuses if s["status"] != "ok"]
    for s in failed:
        _err(f"point {s['id']} failed: {s['error']}: {s['message']}")
    print(f"simulated {len(statuses) - len(failed)} of {len(statuses)} design points")
    return EXIT_PARTIAL if failed else EXIT_OK


def _scope(args):
    return Scope(workload=args.workload, event=args.event, tag=args.tag, module=args.module)


def cmd_query(args):
    g = AGraph.load(args.graph)
    scope = _scope(args)
    value, trace = query_metric(g, args.metric, scope, emit_trace=True)
    if args.trace:
        trace.write(args.trace)
    text = format_value(value.value)
    print(f"{text} {value.unit}")
    if Fraction(text) != value.value:
        print(f"exact: {rational_text(value.value)}")
    return EXIT_OK


def cmd_report(args):
    metrics = [m for item in args.metric or [] for m in item.split(",") if m]
    rows = build_report(
        args.run,
        metrics,
        workloads=args.workload or (),
        event=args.event,
        tags=args.tag or (),
        modules=args.module or (),
    )
    text = report_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    statuses = {r.status for r in rows}
    if any(s.startswith(("simulation-failed", "not-simulated")) for s in statuses):
        return EXIT_PARTIAL
    if any(s.startswith("error") for s in statuses):
        return EXIT_QUERY
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="agraph", description="Design-space exploration over event graphs.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="enumerate design points and write their descriptions")
    g.add_argument("--design", required=True, help="design directory or bundled example name")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--max-points", type=int, default=None, help="refuse to enumerate more points")
    g.add_argument("--force", action="store_true", help="overwrite output and ignore --max-points")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("simulate", help="build and simulate one graph per design point")
    s.add_argument("manifest", help="manifest file or the directory holding it")
    s.add_argument("--out", default=None, help="where graphs/ goes (default: next to the manifest)")
    s.add_argument("--parallel", type=int, default=1, help="worker processes")
    s.set_defaults(func=cmd_simulate)

    q = sub.add_parser("query", help="retrieve one metric from a simulated graph")
    q.add_argument("graph", help="simulated .agraph file")
    q.add_argument("--metric", required=True)
    q.add_argument("--workload")
    q.add_argument("--event")
    q.add_argument("--tag")
    q.add_argument("--module")
    q.add_argument("--trace", help="write the traversal trace (JSON lines) here")
    q.set_defaults(func=cmd_query)

    r = sub.add_parser("report", help="CSV of metrics over every simulated point")
    r.add_argument("run", help="run directory (holding manifest.desc or simulation.desc) or manifest")
    r.add_argument("--metric", action="append", help="metric name; repeat or comma-separate")
    r.add_argument("--workload", action="append")
    r.add_argument("--event")
    r.add_argument("--tag", action="append")
    r.add_argument("--module", action="append")
    r.add_argument("--out", help="CSV path (default: stdout)")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(name)s: %(message)s")
    if args.command == "simulate" and args.parallel < 1:
        _err("--parallel must be at least 1")
        return EXIT_CONFIG
    if args.command == "generate" and args.max_points is not None and args.max_points < 1:
        _err("--max-points must be at least 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (RetrievalError, UnknownNode) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_QUERY
    except (DescriptionError, AGraphError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _err(str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
