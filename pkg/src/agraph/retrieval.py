"""Metric retrieval over a simulated graph.

A scope picks the traversal root (a workload root or any event) and,
optionally, a leaf filter (a tag or a single module).  The metric's declared
aggregation then decides the traversal:

* module: sum over admitted reachable modules of instance count times the
  per-instance database value; edges are ignored;
* summation: leaves-first, a node's value is the sum over its children of
  count x factor x child value; leaves carry the per-activation database value;
* specified: like summation for sequential edges, but parallel edges
  contribute only their maximum, and every event adds its own model value.

Filtered-out leaves stay in the traversal with value zero so traces show them.
"""

import json
from dataclasses import dataclass, field

from .errors import (
    InvalidScope,
    MissingMetric,
    MixedUnitsAcrossNodes,
    UnitMismatch,
    UnknownMetric,
    UnknownScopeName,
    UnreachableEvent,
    UnsimulatedEdge,
)
from .graph import Aggregation, EventNode, Mode, ModuleNode, reachable, topological_order
from .rational import format_value, rational_text, to_rational

SCOPE_FIELDS = ("workload", "event", "tag", "module")


@dataclass(frozen=True)
class Scope:
    workload: str | None = None
    event: str | None = None
    tag: str | None = None
    module: str | None = None

    def __str__(self):
        parts = [f"{f}={getattr(self, f)}" for f in SCOPE_FIELDS if getattr(self, f) is not None]
        return ";".join(parts)

    @classmethod
    def parse(cls, text):
        """Inverse of ``str``: ``"workload=inner_product;tag=pe"``."""
        kwargs = {}
        for part in filter(None, (text or "").split(";")):
            k, _, v = part.partition("=")
            if k not in SCOPE_FIELDS or not v:
                raise InvalidScope(f"bad scope component {part!r}")
            kwargs[k] = v
        return cls(**kwargs)

    def to_dict(self):
        return {f: getattr(self, f) for f in SCOPE_FIELDS if getattr(self, f) is not None}


@dataclass(frozen=True)
class MetricValue:
    value: object
    unit: str
    metric: str
    scope: Scope

    def __str__(self):
        return f"{format_value(self.value)} {self.unit}"


@dataclass
class TraceRecord:
    """One node's step: what came in from children, what it adds, what it passes up."""

    node: str
    kind: str
    admitted: bool
    incoming: list = field(default_factory=list)  # dicts: child, mode, count, factor, child_value, contribution
    local: object = 0
    value: object = 0

    def to_dict(self):
        return {
            "node": self.node,
            "kind": self.kind,
            "admitted": self.admitted,
            "incoming": [
                {k: (rational_text(v) if k in ("count", "factor", "child_value", "contribution") else v)
                 for k, v in inc.items()}
                for inc in self.incoming
            ],
            "local": rational_text(self.local),
            "value": rational_text(self.value),
        }


@dataclass
class Trace:
    metric: str
    aggregation: str
    scope: Scope
    root: str
    records: list = field(default_factory=list)

    def replay(self):
        """Recompute every record from its inputs; return the root value."""
        values = {}
        for r in self.records:
            total_seq, par = 0, []
            for inc in r.incoming:
                if values.get(inc["child"], inc["child_value"]) != inc["child_value"]:
                    raise ValueError(f"{r.node}: child {inc['child']} value disagrees with its record")
                c = inc["count"] * inc["factor"] * inc["child_value"]
                if c != inc["contribution"]:
                    raise ValueError(f"{r.node}: contribution from {inc['child']} does not replay")
                if inc["mode"] == Mode.PARALLEL.value:
                    par.append(c)
                else:
                    total_seq += c
            v = total_seq + (max(par) if par else 0) + r.local
            if v != r.value:
                raise ValueError(f"{r.node}: value does not replay")
            values[r.node] = v
        return values[self.root]

    def to_jsonl(self):
        head = {
            "metric": self.metric,
            "aggregation": self.aggregation,
            "scope": self.scope.to_dict(),
            "root": self.root,
        }
        lines = [json.dumps(head, sort_keys=True)]
        lines += [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        return "\n".join(lines) + "\n"

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_jsonl(cls, text):
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        head = lines[0]
        t = cls(head["metric"], head["aggregation"], Scope(**head["scope"]), head["root"])
        for d in lines[1:]:
            t.records.append(TraceRecord(
                d["node"],
                d["kind"],
                d["admitted"],
                [
                    {k: (to_rational(v) if k in ("count", "factor", "child_value", "contribution") else v)
                     for k, v in inc.items()}
                    for inc in d["incoming"]
                ],
                to_rational(d["local"]),
                to_rational(d["value"]),
            ))
        return t


# --------------------------------------------------------------------------
# Scope resolution
# --------------------------------------------------------------------------


def resolve_scope(g, scope):
    """Return ``(root, admit)`` where ``admit(module_node) -> bool``."""
    if scope.tag is not None and scope.module is not None:
        raise InvalidScope("a scope takes a tag or a module, not both")
    if scope.workload is not None:
        if scope.workload not in g.roots:
            raise UnknownScopeName(f"no workload root named {scope.workload!r} (roots: {', '.join(g.roots)})")
        root = scope.workload
        if scope.event is not None:
            _require_event(g, scope.event)
            if scope.event not in reachable(g, root):
                raise UnreachableEvent(f"event {scope.event!r} is not reachable from workload {root!r}")
    elif scope.event is not None:
        _require_event(g, scope.event)
        root = scope.event
    else:
        raise InvalidScope("a scope needs a workload or an event")

    if scope.module is not None:
        node = g.nodes.get(scope.module)
        if not isinstance(node, ModuleNode):
            raise UnknownScopeName(f"no module named {scope.module!r}")
        name = scope.module
        return root, lambda m: m.name == name
    if scope.tag is not None:
        if not any(scope.tag in m.tags for m in g.module_nodes()):
            raise UnknownScopeName(f"no module carries tag {scope.tag!r}")
        tag = scope.tag
        return root, lambda m: tag in m.tags
    return root, lambda m: True


def _require_event(g, name):
    if not isinstance(g.nodes.get(name), EventNode):
        raise UnknownScopeName(f"no event named {name!r}")


def _scope_order(g, root):
    keep = reachable(g, root)
    return [n for n in topological_order(g) if n in keep]


def _filtered(scope):
    return scope.tag is not None or scope.module is not None


# --------------------------------------------------------------------------
# Aggregations
# --------------------------------------------------------------------------


def _cost_value(g, node, metric):
    if metric not in node.cost:
        raise MissingMetric(metric, f"module {node.name!r}")
    value, unit = node.cost[metric]
    declared = g.metrics[metric].unit
    if unit != declared:
        raise UnitMismatch(f"module {node.name!r}: {metric} is in {unit!r}, metric declares {declared!r}")
    return value


def aggregate_module(g, scope, metric):
    """Instance-weighted sum over admitted modules reachable from the scope root."""
    root, admit = resolve_scope(g, scope)
    trace = Trace(metric, Aggregation.MODULE.value, scope, root)
    total = 0
    incoming = []
    for name in _scope_order(g, root):
        node = g.nodes[name]
        if not isinstance(node, ModuleNode):
            continue
        ok = admit(node)
        local = node.instance_product * _cost_value(g, node, metric) if ok else 0
        trace.records.append(TraceRecord(name, "module", ok, [], local, local))
        incoming.append({
            "child": name, "mode": Mode.SEQUENTIAL.value, "count": 1, "factor": 1,
            "child_value": local, "contribution": local,
        })
        total += local
    if isinstance(g.nodes[root], EventNode):
        trace.records.append(TraceRecord(root, "event", True, incoming, 0, total))
    return MetricValue(to_rational(total), g.metrics[metric].unit, metric, scope), trace


def aggregate_summation(g, scope, metric):
    """Edge-multiplicative sum: every path contributes its count and factor product."""
    root, admit = resolve_scope(g, scope)
    trace = Trace(metric, Aggregation.SUMMATION.value, scope, root)
    values = {}
    for name in _scope_order(g, root):
        node = g.nodes[name]
        if isinstance(node, ModuleNode):
            ok = admit(node)
            v = _cost_value(g, node, metric) if ok else 0
            trace.records.append(TraceRecord(name, "module", ok, [], v, v))
        else:
            incoming = [_contribution(e, metric, values) for e in g.out_edges(name)]
            for inc in incoming:
                inc["mode"] = Mode.SEQUENTIAL.value  # summation ignores aggregation mode
            v = sum(inc["contribution"] for inc in incoming)
            trace.records.append(TraceRecord(name, "event", True, incoming, 0, v))
        values[name] = to_rational(v)
    return MetricValue(values[root], g.metrics[metric].unit, metric, scope), trace


def _contribution(e, metric, values):
    if not e.simulated:
        raise UnsimulatedEdge(f"edge {e.parent} -> {e.child} has no count; simulate the graph first")
    f = e.factor(metric)
    cv = values[e.child]
    return {
        "child": e.child,
        "mode": e.mode.value,
        "count": e.count,
        "factor": f,
        "child_value": cv,
        "contribution": to_rational(e.count * f * cv),
    }


def combine_specified(incoming, own):
    """Sequential contributions add; parallel ones contribute their maximum; own value adds last."""
    seq = sum(inc["contribution"] for inc in incoming if inc["mode"] == Mode.SEQUENTIAL.value)
    par = [inc["contribution"] for inc in incoming if inc["mode"] == Mode.PARALLEL.value]
    return to_rational(seq + (max(par) if par else 0) + own)


def aggregate_specified(g, scope, metric):
    """Model-defined values combined by sequential sum and parallel max.

    Under a tag or module filter only the admitted leaves' values (assigned
    by their parents' models) count; events' own values belong to no module
    and are left out.
    """
    root, admit = resolve_scope(g, scope)
    declared = g.metrics[metric].unit
    filtered = _filtered(scope)
    trace = Trace(metric, Aggregation.SPECIFIED.value, scope, root)
    values = {}
    units = {}
    for name in _scope_order(g, root):
        node = g.nodes[name]
        if isinstance(node, ModuleNode):
            ok = admit(node)
            own = 0
            if ok and metric in node.specified:
                own, unit = node.specified[metric]
                units.setdefault(unit, name)
            trace.records.append(TraceRecord(name, "module", ok, [], own, own))
            values[name] = to_rational(own)
            continue
        incoming = [_contribution(e, metric, values) for e in g.out_edges(name)]
        own = 0
        if not filtered and metric in node.specified:
            own, unit = node.specified[metric]
            units.setdefault(unit, name)
        v = combine_specified(incoming, own)
        trace.records.append(TraceRecord(name, "event", True, incoming, own, v))
        values[name] = v
    if len(units) > 1:
        detail = ", ".join(f"{n} in {u!r}" for u, n in sorted(units.items()))
        raise MixedUnitsAcrossNodes(f"{metric}: nodes disagree on units ({detail})")
    if units and declared not in units:
        (unit, node), = units.items()
        raise UnitMismatch(f"{metric}: node {node!r} reports {unit!r}, metric declares {declared!r}")
    return MetricValue(values[root], declared, metric, scope), trace


AGGREGATORS = {
    Aggregation.MODULE: aggregate_module,
    Aggregation.SUMMATION: aggregate_summation,
    Aggregation.SPECIFIED: aggregate_specified,
}


def query_metric(g, metric, scope, emit_trace=False):
    """Dispatch on the metric's declared aggregation.

    Returns the ``MetricValue``, or ``(MetricValue, Trace)`` when
    ``emit_trace`` is set.
    """
    if metric not in g.metrics:
        raise UnknownMetric(f"no metric named {metric!r} (declared: {', '.join(sorted(g.metrics))})")
    value, trace = AGGREGATORS[g.metrics[metric].aggregation](g, scope, metric)
    return (value, trace) if emit_trace else value
