"""Weight-stationary systolic array running a GEMM.

The ``R x C`` array holds one weight tile while the ``m`` input rows stream
through it; each row is one wave in which every PE performs one MAC.  PEs use
a non-fused multiply then accumulate, so a wave takes 2 cycles (the factor on
the tile -> wave edge).  Total cycles are ``2 * m * k * n / (R * C)`` at full
utilization.
"""

import math
from fractions import Fraction

from ..perf import register_model


def _shape(arch, workload, event_config):
    m, k, n = event_config["dim"]
    rows, cols = arch["pe_mult"]["instance"]
    return m, k, n, rows, cols


def _tiles(k, n, rows, cols):
    return math.ceil(Fraction(k, rows)) * math.ceil(Fraction(n, cols))


@register_model("systolic_array.gemm")
def gemm_model(arch, workload, event):
    config = workload[event]["configuration"]
    m, k, n, rows, cols = _shape(arch, workload, config)
    frequency = arch["pe_mult"]["frequency"]  # MHz
    tiles = _tiles(k, n, rows, cols)
    cycles = tiles * m * 2
    runtime_us = Fraction(cycles, frequency)
    flops = 2 * m * k * n
    throughput = Fraction(flops) / runtime_us / 1000  # FLOP/us -> GFLOP/s
    return {
        "throughput": {"value": throughput, "unit": "GFLOPs"},
        "subevent": {"tile": {"count": tiles, "aggregation": "sequential"}},
    }


@register_model("systolic_array.tile")
def tile_model(arch, workload, event):
    config = workload["gemm"]["configuration"]
    m, k, n, rows, cols = _shape(arch, workload, config)
    tiles = _tiles(k, n, rows, cols)
    # useful MACs over issued MACs; 1 whenever the array divides the matrix
    utilization = Fraction(m * k * n, tiles * m * rows * cols)
    return {
        "subevent": {
            "wave": {
                "count": m,
                "aggregation": "sequential",
                "factor": {"cycle_count": 2, "runtime": 2, "dynamic_energy": utilization},
            },
            # one weight row per SRAM access
            "sram_w": {"count": rows},
        }
    }


@register_model("systolic_array.wave")
def wave_model(arch, workload, event):
    rows, cols = arch["pe_mult"]["instance"]
    frequency = arch["pe_mult"]["frequency"]
    return {
        "cycle_count": {"value": 1, "unit": "cycle"},
        "runtime": {"value": Fraction(1, frequency), "unit": "us"},
        "subevent": {
            "pe_mult": {"count": rows * cols},
            "pe_acc": {"count": rows * cols},
            "pe_reg": {"count": 2 * rows * cols},  # input and partial-sum registers
            "fifo": {"count": rows + cols},
            "out_acc": {"count": cols},
            "sram_in": {"count": 1},
            "sram_out": {"count": 1},
        },
    }
