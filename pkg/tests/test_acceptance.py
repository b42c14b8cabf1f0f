"""Acceptance criteria, one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary lists one
PASS/FAIL line per criterion.
"""

import filecmp
import random
import subprocess
import sys
import time
from fractions import Fraction

from agraph.bundled import EXAMPLE_NAMES, bundled_design_dir
from agraph.constraints import build_constraint_graph, enumerate_design_points
from agraph.descriptions import load_design
from agraph.errors import InjectionLengthMismatch
from agraph.graph import Aggregation
from agraph.pipeline import build_report, generate, read_report, report_csv, simulate_manifest
from agraph.retrieval import Scope, query_metric
from agraph.sweep import ConditionSweep, RangeSweep, expand_sweep
from conftest import criterion
from oracles import (
    LengthMismatch,
    brute_force_points,
    point_set,
    random_constraint_design,
    random_dag,
    seeded,
    specified_recursive,
    summation_by_paths,
)
from test_examples import _points


def _cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "agraph.cli", *map(str, args)], check=True, capture_output=True, text=True
    )


def test_criterion_1_systolic_throughput(tmp_path):
    with criterion(1, "systolic throughput 6.4/25.6/102.4/409.6 GFLOPs exact, < 5 s"):
        start = time.perf_counter()
        generate(load_design(bundled_design_dir("systolic_array")), tmp_path)
        simulate_manifest(tmp_path)
        rows = build_report(tmp_path, ["throughput"])
        elapsed = time.perf_counter() - start
        by_size = {}
        for design, g in _points(tmp_path):
            size = tuple(g.nodes["pe_mult"].instance)
            by_size[size] = next(r.value for r in rows if r.point_id == g.design_point_ref)
        assert by_size == {
            (4, 4): Fraction(32, 5),
            (8, 8): Fraction(128, 5),
            (16, 16): Fraction(512, 5),
            (32, 32): Fraction(2048, 5),
        }
        assert elapsed < 5, elapsed


def test_criterion_2_sweep_equivalence():
    with criterion(2, "range and condition sweeps expand identically (MAC example pair + 100 random pairs)"):
        double = "[x[0] * 2, x[1] * 2]"
        assert expand_sweep(RangeSweep([2, 2], [4, 4], double)) == expand_sweep(
            ConditionSweep([2, 2], "x[0] <= 4", double)
        ) == [[2, 2], [4, 4]]
        rng = random.Random(2)
        for _ in range(100):
            steps = rng.randint(0, 8)
            if rng.random() < 0.5:
                start, k = Fraction(rng.randint(1, 50), rng.choice((1, 2, 3))), rng.randint(2, 5)
                funct = f"x * {k}"
                final = start * k**steps
            else:
                start, k = Fraction(rng.randint(-50, 50), rng.choice((1, 4))), Fraction(rng.randint(1, 9), rng.choice((1, 2)))
                funct = f"x + {k}"
                final = start + k * steps
            if rng.random() < 0.5:
                r = RangeSweep([start, start], [final, final], f"[{funct.replace('x', 'x[0]')}, {funct.replace('x', 'x[1]')}]")
                c = ConditionSweep([start, start], f"x[0] <= {final}", f"[{funct.replace('x', 'x[0]')}, {funct.replace('x', 'x[1]')}]")
            else:
                r = RangeSweep(start, final, funct)
                c = ConditionSweep(start, f"x <= {final}", funct)
            values = expand_sweep(r)
            assert values == expand_sweep(c)
            assert len(values) == steps + 1


def test_criterion_3_aggregation_oracles():
    with criterion(3, "500 random DAGs: summation and specified equal brute-force oracles, < 30 s"):
        start = time.perf_counter()
        for seed in range(500):
            g = random_dag(seeded(seed), max_nodes=12)
            scope = Scope(workload="n00")
            assert query_metric(g, "energy", scope).value == summation_by_paths(g, "n00", "energy"), seed
            assert query_metric(g, "lat", scope).value == specified_recursive(g, "n00", "lat"), seed
        assert time.perf_counter() - start < 30


def test_criterion_4_constraint_oracle():
    with criterion(4, "200 random constraint designs equal brute-force filtering, < 30 s"):
        start = time.perf_counter()
        nonempty = 0
        for seed in range(200):
            d = random_constraint_design(seeded(seed))
            cg = build_constraint_graph(d)
            try:
                got = point_set(enumerate_design_points(cg, d.fixed_parameters()))
            except InjectionLengthMismatch:
                got = "mismatch"
            try:
                want = brute_force_points(cg.nodes, d.constraint.constraints, d.fixed_parameters())
            except LengthMismatch:
                want = "mismatch"
            assert got == want, seed
            nonempty += bool(got) and got != "mismatch"
        assert nonempty > 100  # the generator must not degenerate into empty sweeps
        assert time.perf_counter() - start < 30


def test_criterion_5_partition(runs):
    with criterion(5, "tag-scoped values sum to the full scope on every bundled example"):
        checked = 0
        for name in EXAMPLE_NAMES:
            for _, g in _points(runs[name]):
                tags = sorted({t for m in g.module_nodes() for t in m.tags})
                for metric, spec in sorted(g.metrics.items()):
                    if spec.aggregation not in (Aggregation.MODULE, Aggregation.SUMMATION):
                        continue
                    for root in g.roots:
                        total = query_metric(g, metric, Scope(workload=root)).value
                        parts = [query_metric(g, metric, Scope(workload=root, tag=t)).value for t in tags]
                        assert sum(parts) == total, (name, metric, root)
                        checked += 1
        assert checked > 0


def test_criterion_6_superconducting_breakdown(runs):
    with criterion(6, "sfq_cnn area breakdown exact; total within 3% of 13.1M JJ"):
        rows = build_report(runs["sfq_cnn"], ["area"], tags=["mac", "mac_s", "weight_s", "input_s", "ndro"])
        by_tag = {r.scope.split("tag=")[1]: r.value for r in rows}
        assert by_tag == {"mac": 12300000, "mac_s": 393200, "weight_s": 393200, "input_s": 393200, "ndro": 448}
        total = sum(by_tag.values())
        [full] = build_report(runs["sfq_cnn"], ["area"])
        assert full.value == total
        assert abs(total - 13100000) / Fraction(13100000) <= Fraction(3, 100)


def test_criterion_7_fir_power(runs):
    with criterion(7, "sfq_fir 32 taps: dynamic 8.125 uW and leakage 8.4 mW exact"):
        seen = 0
        for design, g in _points(runs["sfq_fir"]):
            if design.workload.configurations["fir"]["taps"].value != 32:
                continue
            seen += 1
            assert query_metric(g, "dynamic_power", Scope(workload="fir")).value == Fraction("8.125")
            assert query_metric(g, "leakage_power", Scope(workload="fir")).value == Fraction("8.4")
        assert seen > 0


def _full_pipeline(out, parallel):
    _cli("generate", "--design", "mac_array", "--out", out)
    _cli("simulate", out, "--parallel", parallel)
    _cli("report", out, "--metric", "area,leakage_power,dynamic_energy,cycle_count,runtime",
         "--tag", "pe", "--tag", "memory", "--out", out / "report.csv")
    _cli("report", out, "--metric", "area,leakage_power,dynamic_energy,cycle_count,runtime", "--out", out / "full.csv")


def _tree_identical(a, b):
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    assert files_a == files_b
    match, mismatch, errors = filecmp.cmpfiles(a, b, [str(p) for p in files_a], shallow=False)
    assert not mismatch and not errors, mismatch + errors
    return len(match)


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "MAC pipeline twice (serial and --parallel 4) gives byte-identical artifacts"):
        _full_pipeline(tmp_path / "a", 1)
        _full_pipeline(tmp_path / "b", 4)
        assert _tree_identical(tmp_path / "a", tmp_path / "b") > 61 * 4
        rows = read_report((tmp_path / "a" / "full.csv").read_text())
        assert len(rows) == 61 * 2 * 5 and {r["status"] for r in rows} == {"ok"}


def test_criterion_9_mac_pipeline_speed(tmp_path):
    with criterion(9, "full MAC pipeline (generate, simulate, report) < 10 s"):
        start = time.perf_counter()
        generate(load_design(bundled_design_dir("mac_array")), tmp_path)
        simulate_manifest(tmp_path)
        text = report_csv(build_report(tmp_path, ["area", "dynamic_energy", "runtime"]))
        elapsed = time.perf_counter() - start
        assert text.count("\n") == 1 + 61 * 2 * 3
        assert elapsed < 10, elapsed
