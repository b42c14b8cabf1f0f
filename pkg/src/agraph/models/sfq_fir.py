"""Superconducting unary FIR filter: a chain of taps, each a shift register plus a DPU."""

from fractions import Fraction

from ..perf import register_model
from ..rational import product


@register_model("sfq_fir.fir")
def fir_model(arch, workload, event):
    """Per output sample every tap's DPU and shift register are active once.

    A unary stream of ``b`` bits takes ``2**b`` clock cycles per sample.
    """
    config = workload[event]["configuration"]
    bitwidth = config["bitwidth"]
    frequency = arch["dpu"]["frequency"]  # MHz
    return {
        "throughput": {"value": Fraction(frequency, 2**bitwidth), "unit": "MSa/s"},
        "subevent": {
            "dpu": {"count": product(arch["dpu"]["instance"])},
            "shift_register": {"count": product(arch["shift_register"]["instance"])},
        },
    }
