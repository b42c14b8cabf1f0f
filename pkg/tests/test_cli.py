import json
import subprocess
import sys

from agraph.descriptions import Constraint, load_design, save_design
from agraph.pipeline import read_report
from conftest import make_tiny_design


def agraph(*args, check=True, env=None):
    return subprocess.run(
        [sys.executable, "-m", "agraph.cli", *map(str, args)],
        check=check,
        capture_output=True,
        text=True,
        env=env,
    )


def test_generate_simulate_query_report(tmp_path):
    run = tmp_path / "run"
    out = agraph("generate", "--design", "mac_array", "--out", run)
    assert out.stdout.startswith("61 design points written")
    out = agraph("simulate", run, "--parallel", "2")
    assert "simulated 61 of 61" in out.stdout
    graph = sorted((run / "graphs").glob("*.agraph"))[0]

    out = agraph("query", graph, "--metric", "area", "--event", "MA", "--trace", tmp_path / "t.jsonl")
    value, unit = out.stdout.split()[:2]
    assert unit == "mm^2" and float(value) > 0
    lines = (tmp_path / "t.jsonl").read_text().splitlines()
    assert json.loads(lines[0])["scope"] == {"event": "MA"}

    out = agraph("query", graph, "--metric", "runtime", "--workload", "inner_product")
    assert out.stdout.split()[1] == "us"

    csv_path = tmp_path / "r.csv"
    agraph("report", run, "--metric", "area,runtime", "--workload", "inner_product", "--tag", "pe", "--out", csv_path)
    rows = read_report(csv_path.read_text())
    assert len(rows) == 61 * 2 and {r["status"] for r in rows} == {"ok"}
    assert {r["scope"] for r in rows} == {"workload=inner_product;tag=pe"}


def test_query_prints_exact_value_when_rounded(tmp_path):
    design = make_tiny_design(tmp_path / "d", batch=(3,), widths=(16,))
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    agraph("simulate", tmp_path / "run")
    graph = next((tmp_path / "run" / "graphs").glob("*.agraph"))
    out = agraph("query", graph, "--metric", "runtime", "--workload", "w")
    assert out.stdout == "0.0025 us\n"

    design = make_tiny_design(tmp_path / "d3", batch=(3,), widths=(16,), frequency=300)
    agraph("generate", "--design", design, "--out", tmp_path / "run3")
    agraph("simulate", tmp_path / "run3")
    graph = next((tmp_path / "run3" / "graphs").glob("*.agraph"))
    out = agraph("query", graph, "--metric", "runtime", "--workload", "w")
    assert out.stdout == "0.00333333 us\nexact: 1/300\n"


def test_invalid_design_exits_2(tmp_path):
    design = make_tiny_design(tmp_path / "d")
    text = (design / "metric.desc").read_text().replace("module", "average")
    (design / "metric.desc").write_text(text)
    out = agraph("generate", "--design", design, "--out", tmp_path / "run", check=False)
    assert out.returncode == 2
    assert "UnknownAggregationKind" in out.stderr
    (design / "architecture.desc").write_text("format: agraph-architecture/1\nmodlues: {}\n")
    out = agraph("generate", "--design", design, "--out", tmp_path / "run", check=False)
    assert out.returncode == 2 and "SchemaError" in out.stderr


def test_query_errors_exit_3(tmp_path):
    design = make_tiny_design(tmp_path / "d")
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    agraph("simulate", tmp_path / "run")
    graph = next((tmp_path / "run" / "graphs").glob("*.agraph"))
    for args in (["--metric", "power", "--workload", "w"], ["--metric", "area", "--tag", "pe"],
                 ["--metric", "area", "--workload", "w", "--module", "ghost"]):
        out = agraph("query", graph, *args, check=False)
        assert out.returncode == 3, args
    out = agraph("report", tmp_path / "run", "--metric", "power", check=False)
    assert out.returncode == 3 and '"error:UnknownMetric"' in out.stdout


def test_partial_failure_exits_4(tmp_path):
    design = make_tiny_design(tmp_path / "d", widths=(16, 17), batch=(1,))
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    out = agraph("simulate", tmp_path / "run", check=False)
    assert out.returncode == 4
    assert "NoMatch" in out.stderr and "simulated 1 of 2" in out.stdout
    out = agraph("report", tmp_path / "run", "--metric", "area", check=False)
    assert out.returncode == 4
    statuses = sorted(r["status"] for r in read_report(out.stdout))
    assert statuses == ["ok", "simulation-failed:NoMatch"]


def test_empty_sweep_warns_and_exits_0(tmp_path):
    design = make_tiny_design(tmp_path / "d")
    d = load_design(design)
    d.constraint.constraints.append(Constraint("exclusion", (("w", "batch"),), (("reg", "width"),), "a > 0"))
    save_design(d, design)
    out = agraph("generate", "--design", design, "--out", tmp_path / "run")
    assert out.stdout.startswith("0 design points")
    assert "empty sweep" in out.stderr and "constraint #0" in out.stderr


def test_output_guards(tmp_path):
    design = make_tiny_design(tmp_path / "d")
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    out = agraph("generate", "--design", design, "--out", tmp_path / "run", check=False)
    assert out.returncode == 2 and "not empty" in out.stderr
    agraph("generate", "--design", design, "--out", tmp_path / "run", "--force")
    out = agraph("generate", "--design", design, "--out", tmp_path / "x", "--max-points", "2", check=False)
    assert out.returncode == 2 and "--max-points" in out.stderr
    out = agraph("simulate", tmp_path / "run", "--parallel", "0", check=False)
    assert out.returncode == 2


def test_empty_metric_list_gives_header_only(tmp_path):
    design = make_tiny_design(tmp_path / "d")
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    agraph("simulate", tmp_path / "run")
    out = agraph("report", tmp_path / "run")
    assert out.stdout == '"point_id","workload","metric","scope","value","unit","exact","status"\n'


def test_db_path_override(tmp_path):
    import os

    design = make_tiny_design(tmp_path / "d", widths=(17,), batch=(1,))
    tables = tmp_path / "tables"
    tables.mkdir()
    (tables / "extra.csv").write_text(
        "# agraph-cost-table v1\n# interface: cmos\n"
        "class,technology,width,area[mm^2],leakage_power[mW],dynamic_energy[nJ]\n"
        "register,45,17,1,1,1\nmultiplier,45,,2,2,2\n"
    )
    agraph("generate", "--design", design, "--out", tmp_path / "run")
    env = dict(os.environ, AGRAPH_DB_PATH=str(tables))
    agraph("simulate", tmp_path / "run", env=env)
    out = agraph("report", tmp_path / "run", "--metric", "area")
    assert read_report(out.stdout)[0]["value"] == "8"
