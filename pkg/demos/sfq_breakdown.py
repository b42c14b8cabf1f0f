"""Per-class area and power of the superconducting CNN array, plus FIR power.

Run with ``python3 demos/sfq_breakdown.py``.
"""

import tempfile
from pathlib import Path

from agraph.bundled import bundled_design_dir
from agraph.descriptions import load_design
from agraph.pipeline import build_report, generate, simulate_manifest
from agraph.rational import format_value, rational_text


def run(name, tmp):
    out = Path(tmp) / name
    generate(load_design(bundled_design_dir(name)), out)
    simulate_manifest(out)
    return out


def main():
    with tempfile.TemporaryDirectory() as tmp:
        cnn = run("sfq_cnn", tmp)
        tags = ["mac", "mac_s", "weight_s", "input_s", "ndro"]
        area = {r.scope.split("tag=")[1]: r.value for r in build_report(cnn, ["area"], tags=tags)}
        power = {r.scope.split("tag=")[1]: r.value for r in build_report(cnn, ["power"], tags=tags)}
        # areas are printed exactly; six significant digits would hide the last 48 JJ
        print(f"{'class':10s} {'area JJ':>12s} {'power mW':>10s}")
        for t in tags:
            print(f"{t:10s} {rational_text(area[t]):>12s} {format_value(power[t]):>10s}")
        total = sum(area.values())
        print(f"{'total':10s} {rational_text(total):>12s} {format_value(sum(power.values())):>10s}")
        gap = (total - 13100000) / 13100000
        print(f"breakdown total is {format_value(gap * 100)}% above the 13.1M JJ array total")
        [tp] = build_report(cnn, ["throughput"])
        print(f"throughput {format_value(tp.value)} {tp.unit}")

        fir = run("sfq_fir", tmp)
        print("\nFIR filter, per point:")
        for r in build_report(fir, ["dynamic_power", "leakage_power", "throughput"]):
            print(f"  {r.point_id} {r.metric:14s} {format_value(r.value):>10s} {r.unit}")


if __name__ == "__main__":
    main()
