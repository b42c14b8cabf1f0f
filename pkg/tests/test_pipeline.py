from fractions import Fraction

import pytest

from agraph.bundled import bundled_design_dir
from agraph.descriptions import Constraint, load_design
from agraph.pipeline import (
    REPORT_COLUMNS,
    InvalidDesign,
    TooManyPoints,
    build_report,
    generate,
    read_report,
    report_csv,
    resolve_run,
    simulate_manifest,
)
from conftest import make_tiny_design


def _run(design_dir, out, **kw):
    result = generate(load_design(design_dir), out, **kw)
    statuses = simulate_manifest(out)
    return result, statuses


def test_tiny_pipeline_end_to_end(tiny_design, tmp_path):
    result, statuses = _run(tiny_design, tmp_path / "run")
    assert len(result.points) == 4 and all(s["status"] == "ok" for s in statuses)
    run = tmp_path / "run"
    assert (run / "shared" / "w.model").is_file()
    rows = build_report(run, ["dynamic_energy", "area", "runtime"])
    assert [r.status for r in rows] == ["ok"] * 12
    by = {(r.point_id, r.metric): r.value for r in rows}
    for p in result.points:
        batch, width = p[("w", "batch")], p[("reg", "width")]
        reg_e = Fraction("0.00021") if width == 16 else Fraction("0.0004")
        assert by[(p.id, "dynamic_energy")] == batch * 2 * reg_e + batch * Fraction("0.0011")
        assert by[(p.id, "runtime")] == Fraction(1, 400)
    log = (run / "graphs" / f"{result.points[0].id}.log").read_text()
    assert log.startswith("event=w model=w.model inputs=") and log.endswith("\n")


def test_emitted_files_differ_only_where_points_differ(tiny_design, tmp_path):
    result, _ = _run(tiny_design, tmp_path / "run")
    a, b = [p for p in result.points if p[("reg", "width")] == 16]
    run = tmp_path / "run" / "points"
    assert (run / a.id / "architecture.desc").read_bytes() == (run / b.id / "architecture.desc").read_bytes()
    wa = (run / a.id / "workload.desc").read_text().splitlines()
    wb = (run / b.id / "workload.desc").read_text().splitlines()
    assert sum(x != y for x, y in zip(wa, wb)) == 1


def test_missing_cost_row_fails_only_its_point(tmp_path):
    design = make_tiny_design(tmp_path / "d", widths=(16, 17), batch=(1,))
    result, statuses = _run(design, tmp_path / "run")
    by_status = {s["status"]: s for s in statuses}
    assert set(by_status) == {"ok", "failed"}
    assert by_status["failed"]["error"] == "NoMatch"
    rows = build_report(tmp_path / "run", ["area"])
    assert sorted(r.status for r in rows) == ["ok", "simulation-failed:NoMatch"]
    failed = next(r for r in rows if r.status != "ok")
    assert failed.cells()[4] == "" and failed.value is None


def test_rerun_is_byte_identical_and_clears_stale_graphs(tiny_design, tmp_path):
    _run(tiny_design, tmp_path / "run")
    before = {p.name: p.read_bytes() for p in (tmp_path / "run" / "graphs").iterdir()}
    simulate_manifest(tmp_path / "run", parallel=2)
    after = {p.name: p.read_bytes() for p in (tmp_path / "run" / "graphs").iterdir()}
    assert before == after


def test_simulate_to_another_directory(tiny_design, tmp_path):
    generate(load_design(tiny_design), tmp_path / "run")
    simulate_manifest(tmp_path / "run", out_dir=tmp_path / "sim")
    manifest, graphs, statuses = resolve_run(tmp_path / "sim")
    assert manifest.resolve() == (tmp_path / "run" / "manifest.desc").resolve()
    assert graphs == tmp_path / "sim" / "graphs" and len(statuses) == 4
    assert all(r.status == "ok" for r in build_report(tmp_path / "sim", ["area"]))


def test_empty_sweep_produces_empty_manifest(tiny_design, tmp_path):
    d = load_design(tiny_design)
    d.constraint.constraints.append(Constraint("exclusion", (("w", "batch"),), (("reg", "width"),), "a > 0"))
    result = generate(d, tmp_path / "run")
    assert result.points == [] and result.manifest["points"] == []
    assert len(result.diagnostics) == 1
    assert sorted(p.name for p in (tmp_path / "run" / "shared").iterdir()) == ["event.desc", "metric.desc", "w.model"]
    assert simulate_manifest(tmp_path / "run") == []


def test_generate_guards(tiny_design, tmp_path):
    with pytest.raises(TooManyPoints):
        generate(load_design(tiny_design), tmp_path / "a", max_points=3)
    assert len(generate(load_design(tiny_design), tmp_path / "b", max_points=3, force=True).points) == 4
    d = load_design(tiny_design)
    d.metric.add("bad", "x", "average")
    with pytest.raises(InvalidDesign) as info:
        generate(d, tmp_path / "c")
    assert "UnknownAggregationKind" in str(info.value)


def test_report_csv_format(tiny_design, tmp_path):
    _run(tiny_design, tmp_path / "run")
    assert report_csv([]) == ",".join(f'"{c}"' for c in REPORT_COLUMNS) + "\n"
    rows = build_report(tmp_path / "run", ["runtime"], tags=["pe"])
    text = report_csv(rows)
    assert "\r" not in text
    line = text.splitlines()[1]
    # under a tag filter the event's own runtime drops out and no leaf carries one
    assert line.endswith(',"runtime","workload=w;tag=pe",0,"us","0","ok"')
    full = report_csv(build_report(tmp_path / "run", ["runtime"])).splitlines()[1]
    assert full.endswith(',"runtime","workload=w",0.0025,"us","1/400","ok"')
    parsed = read_report(text)
    assert [r["scope"] for r in parsed] == ["workload=w;tag=pe"] * 4


def test_report_query_errors_become_row_status(tiny_design, tmp_path):
    _run(tiny_design, tmp_path / "run")
    rows = build_report(tmp_path / "run", ["power"])
    assert {r.status for r in rows} == {"error:UnknownMetric"}


def test_systolic_report_column(runs):
    rows = build_report(runs["systolic_array"], ["throughput"])
    text = report_csv(rows)
    values = sorted(Fraction(r["exact"]) for r in read_report(text))
    assert [str(float(v)) for v in values] == ["6.4", "25.6", "102.4", "409.6"]
    assert sorted(r["value"] for r in read_report(text)) == sorted(["6.4", "25.6", "102.4", "409.6"])


def test_bundled_mac_manifest(runs):
    _, _, statuses = resolve_run(runs["mac_array"])
    assert len(statuses) == 61
    assert bundled_design_dir("nope") is None
