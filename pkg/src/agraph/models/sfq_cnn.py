"""Superconducting 3D PE array running a convolution layer."""

from fractions import Fraction

from ..perf import register_model
from ..rational import product


def _pass_cycles(workload):
    return 2 ** workload["conv"]["configuration"]["bitwidth"]  # unary stream length


@register_model("sfq_cnn.conv")
def conv_model(arch, workload, event):
    """Split the layer's MACs into full passes over the array."""
    c = workload[event]["configuration"]
    total = c["out_h"] * c["out_w"] * c["out_c"] * c["in_c"] * c["kernel"] * c["kernel"]
    per_pass = product(arch["mac"]["instance"])
    passes = Fraction(total, per_pass)
    frequency = arch["mac"]["frequency"]  # MHz
    runtime_us = passes * Fraction(_pass_cycles(workload), frequency)
    return {
        "throughput": {"value": total / runtime_us / 10**6, "unit": "TMACs"},
        "subevent": {"pass": {"count": passes, "aggregation": "sequential"}},
    }


@register_model("sfq_cnn.pass")
def pass_model(arch, workload, event):
    """One pass: every MAC, its splitters and the NDRO weight store fire once."""
    frequency = arch["mac"]["frequency"]
    cycles = _pass_cycles(workload)
    return {
        "runtime": {"value": Fraction(cycles, frequency), "unit": "us"},
        "subevent": {
            name: {"count": product(arch[name]["instance"])}
            for name in ("mac", "mac_s", "weight_s", "input_s", "ndro")
        },
    }
