"""Throughput and cost of the systolic array across four array sizes.

Run with ``python3 demos/systolic_scaling.py``.
"""

import tempfile
from pathlib import Path

from agraph.bundled import bundled_design_dir
from agraph.descriptions import load_design, load_manifest
from agraph.graph import AGraph
from agraph.pipeline import generate, simulate_manifest
from agraph.rational import format_value
from agraph.retrieval import Scope, query_metric


def main():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        generate(load_design(bundled_design_dir("systolic_array")), out)
        simulate_manifest(out)
        manifest, _ = load_manifest(out)
        rows = []
        for entry in manifest["points"]:
            g = AGraph.load(out / "graphs" / f"{entry['id']}.agraph")
            rows_, cols = g.nodes["pe_mult"].instance
            root = Scope(workload="gemm")
            rows.append((
                rows_ * cols,
                f"{rows_}x{cols}",
                query_metric(g, "throughput", root),
                query_metric(g, "runtime", root),
                query_metric(g, "area", root),
                query_metric(g, "capacity", Scope(workload="gemm", tag="memory")),
            ))
        print(f"{'array':>6s} {'GFLOPs':>10s} {'runtime us':>12s} {'area mm^2':>10s} {'SRAM KB':>8s}")
        for _, name, tp, rt, area, cap in sorted(rows, key=lambda r: r[0]):
            print(f"{name:>6s} {format_value(tp.value):>10s} {format_value(rt.value):>12s} "
                  f"{format_value(area.value):>10s} {format_value(cap.value):>8s}")


if __name__ == "__main__":
    main()
