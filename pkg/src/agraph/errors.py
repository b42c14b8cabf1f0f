"""Exception hierarchy.

Errors fall into four families that the command-line front end maps onto exit
codes: description/configuration problems, cost lookups, simulation, and
metric retrieval.
"""


class AGraphError(Exception):
    """Base class for every error raised by this package."""


# --------------------------------------------------------------------------
# Configuration / description errors
# --------------------------------------------------------------------------


class DescriptionError(AGraphError):
    """A design description is malformed or inconsistent."""


class ParseError(DescriptionError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class SchemaError(DescriptionError):
    def __init__(self, key, message="", path=None):
        self.key = key
        self.path = None if path is None else str(path)
        where = f"{self.path}: " if self.path else ""
        super().__init__(f"{where}{key}: {message}" if message else f"{where}{key}")


class NotSerializable(DescriptionError):
    """A description holds a native callable that cannot be written to disk."""


class OverwriteRefused(DescriptionError):
    pass


class DuplicateName(DescriptionError):
    pass


class UnresolvedSubevent(DescriptionError):
    def __init__(self, event, subevent):
        self.event = event
        self.subevent = subevent
        super().__init__(f"event {event!r} names unknown subevent {subevent!r}")


class CycleDetected(DescriptionError):
    def __init__(self, path):
        self.path = list(path)
        super().__init__("cycle: " + " -> ".join(self.path))


class UnknownNode(AGraphError):
    pass


class EvalError(DescriptionError):
    """An expression failed to parse or evaluate."""

    def __init__(self, message, source=None, col=None, where=None):
        self.source = source
        self.col = col
        self.where = where
        loc = ""
        if where:
            loc += f"{where}: "
        if source is not None:
            loc += f"in {source!r}"
            if col is not None:
                loc += f" at column {col}"
            loc += ": "
        super().__init__(loc + message)


# --------------------------------------------------------------------------
# Sweep engine
# --------------------------------------------------------------------------


class SweepError(DescriptionError):
    pass


class ExpansionCapExceeded(SweepError):
    pass


class NonSweptParticipant(SweepError):
    pass


class DegenerateConstraint(SweepError):
    pass


class InjectionLengthMismatch(SweepError):
    pass


# --------------------------------------------------------------------------
# Cost databases
# --------------------------------------------------------------------------


class CostError(AGraphError):
    pass


class DuplicateKey(CostError):
    pass


class DuplicateInterface(CostError):
    pass


class UnknownInterface(CostError):
    pass


class NoMatch(CostError):
    def __init__(self, query_key, nearest=()):
        self.query_key = dict(query_key)
        self.nearest = list(nearest)
        msg = f"no cost entry matches {_fmt_key(self.query_key)}"
        if self.nearest:
            msg += "; nearest: " + ", ".join(_fmt_key(k) for k in self.nearest)
        super().__init__(msg)


class MissingMetric(CostError):
    def __init__(self, metric, where=""):
        self.metric = metric
        super().__init__(f"metric {metric!r} missing" + (f" for {where}" if where else ""))


class AdaptorError(CostError):
    def __init__(self, adaptor, cause):
        self.adaptor = adaptor
        self.cause = cause
        super().__init__(f"adaptor {adaptor!r} failed: {cause}")


def _fmt_key(key):
    return "{" + ", ".join(f"{k}={key[k]}" for k in sorted(key)) + "}"


# --------------------------------------------------------------------------
# Simulation
# --------------------------------------------------------------------------


class SimulationError(AGraphError):
    pass


class UnknownModel(SimulationError):
    def __init__(self, event, ref):
        self.event = event
        self.ref = ref
        super().__init__(f"event {event!r} references unknown performance model {ref!r}")


class ModelError(SimulationError):
    def __init__(self, event, cause):
        self.event = event
        self.cause = cause
        super().__init__(f"performance model for {event!r} failed: {cause}")


class ContractViolation(SimulationError):
    pass


class NegativeCount(SimulationError):
    pass


# --------------------------------------------------------------------------
# Retrieval
# --------------------------------------------------------------------------


class RetrievalError(AGraphError):
    pass


class UnknownMetric(RetrievalError):
    pass


class UnknownScopeName(RetrievalError):
    pass


class UnreachableEvent(RetrievalError):
    pass


class UnsimulatedEdge(RetrievalError):
    pass


class UnitMismatch(RetrievalError):
    pass


class MixedUnitsAcrossNodes(RetrievalError):
    pass


class InvalidScope(RetrievalError):
    """A scope combines options that cannot be used together or names no root."""
