"""MAC-array models: a GEMM workload mapped onto one small MAC array (MA)."""

from fractions import Fraction

from ..perf import register_model
from ..rational import product


@register_model("mac_array.product")
def product_model(arch, workload, event):
    """Count the MA mappings a tiled ``m x k x n`` GEMM needs.

    Mappings run one after another on the single array.  Each MA mapping is a
    fused MAC in the module database; the factor of 2 on cycles and runtime
    turns it into a 2-cycle non-fused MAC.
    """
    config = workload[event]["configuration"]
    m, k, n = config["dim"]
    ma_dim = config["tile"][0]
    batch = config["batch"]
    mappings = Fraction(m, ma_dim) * Fraction(k, ma_dim) * Fraction(n, ma_dim) * batch
    return {
        "subevent": {
            "MA": {
                "count": mappings,
                "aggregation": "sequential",
                "factor": {"cycle_count": 2, "runtime": 2},
            }
        }
    }


@register_model("mac_array.mac")
def ma_model(arch, workload, event):
    """One MA activation: every PE module fires once, SRAM streams the tile."""
    config = workload["inner_product"]["configuration"]
    ma_dim = config["tile"][0]
    bitwidth = arch["ireg"]["query"]["width"]
    frequency = arch["sram"]["frequency"]  # MHz, so 1/frequency is in us
    sram_bank = arch["sram"]["query"]["bank"]
    sram_width = arch["sram"]["query"]["width"]

    total_bits = ma_dim * ma_dim * ma_dim * bitwidth
    sram_events = Fraction(total_bits, sram_bank * sram_width)
    return {
        "cycle_count": {"value": 1, "unit": "cycle"},
        "runtime": {"value": Fraction(1, frequency), "unit": "us"},
        "subevent": {
            "mult": {"count": product(arch["mult"]["instance"])},
            "acc": {"count": product(arch["acc"]["instance"])},
            "ireg": {"count": product(arch["ireg"]["instance"])},
            "wreg": {"count": product(arch["wreg"]["instance"])},
            "oreg": {"count": product(arch["oreg"]["instance"])},
            "sram": {"count": sram_events},
        },
    }
