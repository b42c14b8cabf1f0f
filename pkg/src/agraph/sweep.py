"""Sweep objects: generators of parameter value lists.

Each sweep starts from an initial value and repeatedly applies ``funct``:

* ``IterationSweep`` stops after a fixed number of values;
* ``RangeSweep`` stops once the value equals ``final`` (inclusive);
* ``ConditionSweep`` keeps values while ``condition`` holds and stops before
  the first failure.

``funct`` and ``condition`` may be expression strings (serialisable) or
native callables (in-memory only).
"""

from dataclasses import dataclass

from .errors import EvalError, ExpansionCapExceeded, NotSerializable, SweepError
from .expr import Expr, as_callable
from .rational import normalize

DEFAULT_CAP = 4096


def _apply(fn, value, what):
    try:
        return normalize(fn(value))
    except EvalError:
        raise
    except Exception as exc:  # native callables may raise anything
        raise EvalError(f"{what} raised {type(exc).__name__}: {exc}") from None


def _expr_text(fn, what):
    if isinstance(fn, Expr):
        return fn.source
    raise NotSerializable(f"{what} is a native callable and cannot be serialised")


@dataclass
class IterationSweep:
    initial: object
    iterations: int
    funct: object

    def __post_init__(self):
        self.initial = normalize(self.initial)
        self.funct = as_callable(self.funct, ("x",))
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise SweepError(f"iterations must be a positive integer, got {self.iterations!r}")

    def expand(self, cap=DEFAULT_CAP):
        if self.iterations > cap:
            raise ExpansionCapExceeded(f"{self.iterations} iterations exceed the cap of {cap}")
        values = [self.initial]
        while len(values) < self.iterations:
            values.append(_apply(self.funct, values[-1], "sweep function"))
        return values

    def to_dict(self):
        return {
            "sweep": "iteration",
            "initial": self.initial,
            "iterations": self.iterations,
            "funct": _expr_text(self.funct, "sweep function"),
        }


@dataclass
class RangeSweep:
    initial: object
    final: object
    funct: object

    def __post_init__(self):
        self.initial = normalize(self.initial)
        self.final = normalize(self.final)
        self.funct = as_callable(self.funct, ("x",))

    def expand(self, cap=DEFAULT_CAP):
        values = [self.initial]
        while values[-1] != self.final:
            if len(values) >= cap:
                raise ExpansionCapExceeded(
                    f"range sweep from {self.initial!r} did not reach {self.final!r} within {cap} values"
                )
            values.append(_apply(self.funct, values[-1], "sweep function"))
        return values

    def to_dict(self):
        return {
            "sweep": "range",
            "initial": self.initial,
            "final": self.final,
            "funct": _expr_text(self.funct, "sweep function"),
        }


@dataclass
class ConditionSweep:
    initial: object
    condition: object
    funct: object

    def __post_init__(self):
        self.initial = normalize(self.initial)
        self.condition = as_callable(self.condition, ("x",))
        self.funct = as_callable(self.funct, ("x",))

    def expand(self, cap=DEFAULT_CAP):
        values = []
        v = self.initial
        while _apply(self.condition, v, "sweep condition"):
            if len(values) >= cap:
                raise ExpansionCapExceeded(
                    f"condition sweep from {self.initial!r} still true after {cap} values"
                )
            values.append(v)
            v = _apply(self.funct, v, "sweep function")
        return values

    def to_dict(self):
        return {
            "sweep": "condition",
            "initial": self.initial,
            "condition": _expr_text(self.condition, "sweep condition"),
            "funct": _expr_text(self.funct, "sweep function"),
        }


SWEEP_TYPES = (IterationSweep, RangeSweep, ConditionSweep)


def expand_sweep(s, cap=DEFAULT_CAP):
    """Expand a sweep object into its list of values."""
    if cap < 1:
        raise SweepError("expansion cap must be at least 1")
    return s.expand(cap)


def sweep_from_dict(d):
    kind = d.get("sweep")
    if kind == "iteration":
        return IterationSweep(d["initial"], d["iterations"], Expr(d["funct"], ("x",)))
    if kind == "range":
        return RangeSweep(d["initial"], d["final"], Expr(d["funct"], ("x",)))
    if kind == "condition":
        return ConditionSweep(d["initial"], Expr(d["condition"], ("x",)), Expr(d["funct"], ("x",)))
    raise SweepError(f"unknown sweep kind {kind!r}")


SWEEP_KEYS = {
    "iteration": {"sweep", "initial", "iterations", "funct"},
    "range": {"sweep", "initial", "final", "funct"},
    "condition": {"sweep", "initial", "condition", "funct"},
}
