import contextlib
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from agraph.bundled import bundled_design_dir  # noqa: E402
from agraph.descriptions import load_design  # noqa: E402


@pytest.fixture
def mac_design():
    return load_design(bundled_design_dir("mac_array"))


@pytest.fixture(autouse=True)
def _isolated_db_path(monkeypatch):
    # a developer's AGRAPH_DB_PATH must not leak into test results
    monkeypatch.delenv("AGRAPH_DB_PATH", raising=False)


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    """Every bundled design generated and simulated once: name -> run directory."""
    from agraph.bundled import EXAMPLE_NAMES
    from agraph.pipeline import generate, simulate_manifest

    out = {}
    for name in EXAMPLE_NAMES:
        run = tmp_path_factory.mktemp(name)
        generate(load_design(bundled_design_dir(name)), run, force=True)
        statuses = simulate_manifest(run)
        assert all(s["status"] == "ok" for s in statuses), statuses
        out[name] = run
    return out


def make_tiny_design(directory, widths=(16, 32), batch=(1, 2), frequency=400):
    """A two-level design on disk using an expression model and the bundled cmos table."""
    from agraph.descriptions import Design, save_design

    d = Design("tiny")
    d.workload.config("w")
    d.workload.add("w", "batch", list(batch), sweep=True)
    d.event.add("w", ["reg", "mul"], "w.model")
    d.architecture.attr(technology=45, frequency=frequency, interface="cmos")
    d.architecture.add("reg", [2], tag="pe", query={"class": "register", "width": list(widths)})
    d.architecture.add("mul", [3], tag="pe", query={"class": "multiplier"})
    d.metric.add("area", "mm^2", "module")
    d.metric.add("dynamic_energy", "nJ", "summation")
    d.metric.add("runtime", "us", "specified")
    save_design(d, directory)
    (Path(directory) / "w.model").write_text(
        "format: agraph-model/1\n"
        "specified:\n  runtime: {value: '1 / arch.reg.frequency', unit: us}\n"
        "subevents:\n"
        "  reg: {count: 'workload.w.configuration.batch * 2'}\n"
        "  mul: {count: 'workload.w.configuration.batch'}\n",
        encoding="utf-8",
    )
    return Path(directory)


@pytest.fixture
def tiny_design(tmp_path):
    return make_tiny_design(tmp_path / "design")


ACCEPTANCE_LINES = []


@contextlib.contextmanager
def criterion(number, title):
    """Record one acceptance criterion as PASS or FAIL with its wall time."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f} s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
