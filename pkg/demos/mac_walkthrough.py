"""Walk the MAC-array example from descriptions to scoped metrics.

Run with ``python3 demos/mac_walkthrough.py``.  Everything is written to a
temporary directory.
"""

import tempfile
from pathlib import Path

from agraph.bundled import bundled_design_dir
from agraph.descriptions import load_design, load_manifest, load_point
from agraph.graph import AGraph, subgraph_from, topological_order
from agraph.pipeline import generate, simulate_manifest
from agraph.rational import format_value
from agraph.retrieval import Scope, query_metric


def main():
    design = load_design(bundled_design_dir("mac_array"))
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "run"
        result = generate(design, out)
        print(f"{len(result.points)} design points after constraints")

        statuses = simulate_manifest(out)
        print(f"simulated {sum(s['status'] == 'ok' for s in statuses)} graphs")

        # pick the 4x4 array at batch 1
        manifest, base = load_manifest(out)
        for entry in manifest["points"]:
            point = load_point(base, manifest, entry)
            cfg = point.workload.configurations["inner_product"]
            if cfg["tile"].value == [4, 4] and cfg["batch"].value == 1:
                break
        g = AGraph.load(out / "graphs" / f"{entry['id']}.agraph")
        print(f"\npoint {entry['id']}: tile 4x4, batch 1")
        print("evaluation order:", " -> ".join(topological_order(g)))
        print("MA subgraph nodes:", sorted(subgraph_from(g, "MA").nodes))

        scopes = [
            Scope(workload="inner_product"),
            Scope(event="MA"),
            Scope(workload="inner_product", tag="pe"),
            Scope(workload="inner_product", tag="memory"),
            Scope(workload="inner_product", module="mult"),
        ]
        print()
        for metric in ("area", "dynamic_energy", "cycle_count", "runtime"):
            for scope in scopes:
                v = query_metric(g, metric, scope)
                print(f"{metric:15s} {str(scope):40s} {format_value(v.value):>12s} {v.unit}")


if __name__ == "__main__":
    main()
