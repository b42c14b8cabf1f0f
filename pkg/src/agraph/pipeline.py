"""End-to-end pipeline: enumerate points, simulate graphs, assemble reports.

Output layout of one run::

    out/
      manifest.desc            point id -> description files
      shared/                  event + metric descriptions, expression models
      points/<id>/             workload.desc, architecture.desc
      graphs/<id>.agraph       simulated graph per point
      graphs/<id>.log          one line per evaluated event
      simulation.desc          per-point status of the last simulate run

Every file is a pure function of the design and the cost tables: no
timestamps, sorted keys, sorted point order.
"""

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import yamlio
from .constraints import build_constraint_graph, count_design_points, enumerate_design_points
from .costdb import default_registry
from .descriptions import (
    emit_design_point_files,
    load_manifest,
    load_point,
    validate,
)
from .errors import AGraphError, DescriptionError
from .graph import AGraph, build_skeleton
from .perf import ModelRegistry, resolve_models, simulate
from .rational import format_value, rational_text
from .retrieval import Scope, query_metric
from .sweep import DEFAULT_CAP

log = logging.getLogger(__name__)

SIMULATION_FORMAT = "agraph-simulation/1"
REPORT_COLUMNS = ("point_id", "workload", "metric", "scope", "value", "unit", "exact", "status")


class InvalidDesign(DescriptionError):
    def __init__(self, report):
        self.report = report
        super().__init__("design is invalid:\n" + str(report))


class TooManyPoints(DescriptionError):
    pass


# --------------------------------------------------------------------------
# generate
# --------------------------------------------------------------------------


@dataclass
class GenerateResult:
    manifest: dict
    points: list
    diagnostics: list = field(default_factory=list)


def generate(design, out_dir, force=False, max_points=None, cap=DEFAULT_CAP):
    """Validate, enumerate and emit every design point of ``design``.

    Raises:
        InvalidDesign: validation found problems.
        TooManyPoints: more than ``max_points`` points and ``force`` unset.
    """
    report = validate(design, cap)
    if not report.ok:
        raise InvalidDesign(report)
    cg = build_constraint_graph(design, cap)
    if max_points is not None and not force:
        n = count_design_points(cg)
        if n > max_points:
            raise TooManyPoints(f"{n} design points exceed --max-points {max_points} (use --force)")
    diagnostics = []
    points = enumerate_design_points(cg, design.fixed_parameters(), diagnostics)
    manifest = emit_design_point_files(design, points, out_dir, force=force)
    return GenerateResult(manifest, points, diagnostics)


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


_REGISTRIES = {}


def cached_registry():
    """The default cost registry, loaded once per search path per process."""
    key = os.environ.get("AGRAPH_DB_PATH", "")
    if key not in _REGISTRIES:
        _REGISTRIES[key] = default_registry()
    return _REGISTRIES[key]


def build_point_graph(design, costs=None, models=None, log_lines=None):
    """Skeleton + simulation for one concrete design."""
    costs = cached_registry() if costs is None else costs
    if models is None:
        registry = ModelRegistry(search_dirs=[design.source_dir] if design.source_dir else [])
        models = resolve_models(design.event, registry)
    skeleton = build_skeleton(design.event, design.architecture, metrics=design.metric)
    return simulate(skeleton, design, models, costs, log_lines)


def _simulate_one(args):
    manifest_dir, manifest, entry, graphs_dir = args
    pid = entry["id"]
    try:
        design = load_point(manifest_dir, manifest, entry)
        lines = []
        g = build_point_graph(design, log_lines=lines)
        g.design_point_ref = pid
        g.check()
        g.save(Path(graphs_dir) / f"{pid}.agraph")
        with open(Path(graphs_dir) / f"{pid}.log", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(line + "\n" for line in lines))
        return {"id": pid, "status": "ok"}
    except AGraphError as exc:
        return {"id": pid, "status": "failed", "error": type(exc).__name__, "message": str(exc)}


def simulate_manifest(manifest_path, out_dir=None, parallel=1):
    """Simulate every point of a manifest; failures are isolated per point.

    Returns the list of per-point statuses, also written to ``simulation.desc``.
    """
    manifest, manifest_dir = load_manifest(manifest_path)
    out_dir = Path(out_dir) if out_dir is not None else manifest_dir
    graphs_dir = out_dir / "graphs"
    graphs_dir.mkdir(parents=True, exist_ok=True)
    entries = sorted(manifest["points"], key=lambda e: e["id"])
    # stale outputs from an earlier run must not survive a failure this time
    for entry in entries:
        for suffix in (".agraph", ".log"):
            (graphs_dir / f"{entry['id']}{suffix}").unlink(missing_ok=True)
    jobs = [(str(manifest_dir), manifest, e, str(graphs_dir)) for e in entries]
    if parallel and parallel > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            statuses = list(pool.map(_simulate_one, jobs))
    else:
        statuses = [_simulate_one(j) for j in jobs]
    for s in statuses:
        if s["status"] == "ok":
            s["graph"] = f"graphs/{s['id']}.agraph"
    summary = {
        "format": SIMULATION_FORMAT,
        "design": manifest["design"],
        "manifest": os.path.relpath(manifest_dir / "manifest.desc", out_dir).replace(os.sep, "/"),
        "points": statuses,
    }
    yamlio.dump_file(summary, out_dir / "simulation.desc")
    return statuses


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    point_id: str
    workload: str
    metric: str
    scope: str
    value: object
    unit: str
    status: str

    def cells(self):
        ok = self.value is not None
        return (
            self.point_id,
            self.workload,
            self.metric,
            self.scope,
            format_value(self.value) if ok else "",
            self.unit,
            rational_text(self.value) if ok else "",
            self.status,
        )


def scopes_for(graph, workloads=(), event=None, tags=(), modules=()):
    """Cross the requested roots with the requested leaf filters.

    With no workload and no event every workload root of the graph is used.
    """
    if workloads:
        roots = [dict(workload=w, event=event) for w in workloads]
    elif event is not None:
        roots = [dict(event=event)]
    else:
        roots = [dict(workload=r) for r in graph.roots]
    filters = [dict(tag=t) for t in tags] + [dict(module=m) for m in modules] or [{}]
    return [Scope(**r, **f) for r in roots for f in filters]


def resolve_run(path):
    """``(manifest path, graphs dir, per-point simulation status)`` for a run directory.

    ``path`` may be a manifest, a directory holding one, or a directory
    holding ``simulation.desc`` from a ``simulate --out`` run elsewhere.
    """
    path = Path(path)
    statuses = {}
    sim = path / "simulation.desc" if path.is_dir() else None
    if sim is not None and sim.exists():
        raw = yamlio.load_file(sim)
        statuses = {p["id"]: p for p in raw.get("points") or []}
        return path / raw["manifest"], path / "graphs", statuses
    manifest_file = path / "manifest.desc" if path.is_dir() else path
    return manifest_file, manifest_file.parent / "graphs", statuses


def build_report(run_path, metrics, workloads=(), event=None, tags=(), modules=()):
    """Rows for every point x metric x scope, sorted by (point id, metric, scope)."""
    manifest_path, graphs_dir, statuses = resolve_run(run_path)
    manifest, _ = load_manifest(manifest_path)
    rows = []
    for entry in sorted(manifest["points"], key=lambda e: e["id"]):
        pid = entry["id"]
        path = graphs_dir / f"{pid}.agraph"
        if not path.exists():
            st = statuses.get(pid, {})
            status = f"simulation-failed:{st['error']}" if "error" in st else "not-simulated"
            for metric in metrics:
                for scope in scopes_for_names(workloads, event, tags, modules):
                    rows.append(ReportRow(pid, scope.workload or "", metric, str(scope), None, "", status))
            continue
        g = AGraph.load(path)
        for metric in metrics:
            for scope in scopes_for(g, workloads, event, tags, modules):
                try:
                    mv = query_metric(g, metric, scope)
                    rows.append(ReportRow(pid, scope.workload or "", metric, str(scope), mv.value, mv.unit, "ok"))
                except AGraphError as exc:
                    unit = g.metrics[metric].unit if metric in g.metrics else ""
                    rows.append(ReportRow(
                        pid, scope.workload or "", metric, str(scope), None, unit, f"error:{type(exc).__name__}"
                    ))
    rows.sort(key=lambda r: (r.point_id, r.metric, r.scope))
    return rows


def scopes_for_names(workloads=(), event=None, tags=(), modules=()):
    """Like ``scopes_for`` without a graph; used to label rows of unsimulated points."""
    roots = [dict(workload=w, event=event) for w in workloads] or [dict(event=event)]
    filters = [dict(tag=t) for t in tags] + [dict(module=m) for m in modules] or [{}]
    return [Scope(**r, **f) for r in roots for f in filters]


def _quote(text):
    return '"' + str(text).replace('"', '""') + '"'


def report_csv(rows):
    """CSV text: comma separated, LF line ends, strings quoted, numbers bare."""
    lines = [",".join(_quote(c) for c in REPORT_COLUMNS)]
    for r in rows:
        cells = r.cells()
        out = []
        for name, cell in zip(REPORT_COLUMNS, cells):
            out.append(cell if name == "value" else _quote(cell))
        lines.append(",".join(out))
    return "\n".join(lines) + "\n"


def read_report(text):
    """Parse report CSV back into dicts (for tests and plotting scripts)."""
    return list(csv.DictReader(io.StringIO(text)))
