"""The A-Graph: a weighted DAG of event nodes over architecture-module leaves.

Event nodes (workloads and intermediate events) carry a performance-model
reference and, once simulated, the model's specified metric values.  Module
nodes are the leaves; they carry instance shape, tags, the cost query and,
once simulated, the per-instance cost record.  Edges carry the invocation
count of the child per parent event, an aggregation mode and per-metric
multiplicative factors.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from . import yamlio
from .errors import (
    CycleDetected,
    DescriptionError,
    DuplicateName,
    SchemaError,
    UnknownNode,
    UnresolvedSubevent,
)
from .rational import normalize, product, to_rational

GRAPH_FORMAT = "agraph-graph/1"


class Mode(str, Enum):
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"


class Aggregation(str, Enum):
    MODULE = "module"
    SUMMATION = "summation"
    SPECIFIED = "specified"


class _Unsimulated:
    """Marker for an edge whose count has not been computed yet.

    Zero is a legal count, so a distinct sentinel keeps retrieval on an
    unsimulated graph from silently returning zero.
    """

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNSIMULATED"

    def __reduce__(self):
        return (_Unsimulated, ())


UNSIMULATED = _Unsimulated()


@dataclass(frozen=True)
class MetricSpec:
    unit: str
    aggregation: Aggregation


@dataclass
class EventNode:
    name: str
    model: str | None = None
    specified: dict = field(default_factory=dict)  # metric -> (value, unit)

    kind = "event"


@dataclass
class ModuleNode:
    name: str
    instance: list
    tags: tuple = ()
    query: dict = field(default_factory=dict)
    attributes: dict = field(default_factory=dict)
    cost: dict = field(default_factory=dict)  # metric -> (value, unit), per instance
    provenance: str | None = None
    specified: dict = field(default_factory=dict)  # assigned by a parent's model

    kind = "module"

    def __post_init__(self):
        self.instance = normalize(list(self.instance))
        if not self.instance or any(
            not isinstance(i, int) or isinstance(i, bool) or i < 1 for i in self.instance
        ):
            raise DescriptionError(
                f"module {self.name!r}: instance must be a non-empty list of positive integers, "
                f"got {self.instance!r}"
            )
        self.tags = tuple(sorted(set(self.tags)))

    @property
    def instance_product(self):
        return product(self.instance)


@dataclass
class Edge:
    parent: str
    child: str
    count: object = UNSIMULATED
    mode: Mode = Mode.SEQUENTIAL
    factors: dict = field(default_factory=dict)

    @property
    def simulated(self):
        return self.count is not UNSIMULATED

    def factor(self, metric):
        return self.factors.get(metric, 1)


class AGraph:
    """Mutable while being built; treated as read-only once simulated."""

    def __init__(self, design_point_ref=None, metrics=None):
        self.nodes = {}
        self.edges = {}
        self._children = {}
        self._parents = {}
        self.roots = []
        self.design_point_ref = design_point_ref
        self.metrics = dict(metrics or {})

    # -- construction ----------------------------------------------------

    def add_node(self, node):
        if node.name in self.nodes:
            raise DuplicateName(f"node {node.name!r} already exists")
        self.nodes[node.name] = node
        self._children[node.name] = []
        self._parents[node.name] = []
        return node

    def add_edge(self, edge):
        for end in (edge.parent, edge.child):
            if end not in self.nodes:
                raise UnknownNode(end)
        key = (edge.parent, edge.child)
        if key in self.edges:
            raise DuplicateName(f"edge {edge.parent} -> {edge.child} already exists")
        if isinstance(self.nodes[edge.parent], ModuleNode):
            raise DescriptionError(f"module {edge.parent!r} cannot have subevents")
        self.edges[key] = edge
        self._children[edge.parent].append(edge.child)
        self._parents[edge.child].append(edge.parent)
        return edge

    # -- queries ---------------------------------------------------------

    def children(self, name):
        return sorted(self._children[name])

    def parents(self, name):
        return sorted(self._parents[name])

    def edge(self, parent, child):
        return self.edges[(parent, child)]

    def out_edges(self, name):
        return [self.edges[(name, c)] for c in self.children(name)]

    def leaves(self):
        return sorted(n for n in self.nodes if not self._children[n])

    def event_nodes(self):
        return [self.nodes[n] for n in sorted(self.nodes) if isinstance(self.nodes[n], EventNode)]

    def module_nodes(self):
        return [self.nodes[n] for n in sorted(self.nodes) if isinstance(self.nodes[n], ModuleNode)]

    @property
    def is_simulated(self):
        return all(e.simulated for e in self.edges.values())

    def check(self):
        """Verify the structural invariants; raise on the first violation."""
        topological_order(self)
        for name, node in self.nodes.items():
            if isinstance(node, ModuleNode) and self._children[name]:
                raise DescriptionError(f"module {name!r} has outgoing edges")
            if isinstance(node, EventNode) and not self._children[name]:
                raise DescriptionError(f"event {name!r} has no subevents")
        for r in self.roots:
            if r not in self.nodes:
                raise UnknownNode(r)
            if not isinstance(self.nodes[r], EventNode):
                raise DescriptionError(f"root {r!r} is not an event")
        for e in self.edges.values():
            if e.simulated and e.count < 0:
                raise DescriptionError(f"edge {e.parent} -> {e.child} has negative count")
            if any(f <= 0 for f in e.factors.values()):
                raise DescriptionError(f"edge {e.parent} -> {e.child} has a non-positive factor")

    # -- serialization ---------------------------------------------------

    def to_dict(self):
        nodes = {}
        for name in sorted(self.nodes):
            node = self.nodes[name]
            if isinstance(node, EventNode):
                nodes[name] = {
                    "kind": "event",
                    "model": node.model,
                    "specified": _metric_map_out(node.specified),
                }
            else:
                nodes[name] = {
                    "kind": "module",
                    "instance": list(node.instance),
                    "tags": list(node.tags),
                    "query": dict(node.query),
                    "attributes": dict(node.attributes),
                    "cost": _metric_map_out(node.cost),
                    "provenance": node.provenance,
                    "specified": _metric_map_out(node.specified),
                }
        edges = []
        for key in sorted(self.edges):
            e = self.edges[key]
            edges.append({
                "parent": e.parent,
                "child": e.child,
                "count": None if e.count is UNSIMULATED else e.count,
                "mode": e.mode.value,
                "factors": dict(e.factors),
            })
        return {
            "format": GRAPH_FORMAT,
            "design_point": self.design_point_ref,
            "roots": list(self.roots),
            "metrics": {
                m: {"unit": s.unit, "aggregation": s.aggregation.value}
                for m, s in sorted(self.metrics.items())
            },
            "nodes": nodes,
            "edges": edges,
        }

    @classmethod
    def from_dict(cls, data, path="<graph>"):
        if not isinstance(data, dict) or data.get("format") != GRAPH_FORMAT:
            raise SchemaError("format", f"expected {GRAPH_FORMAT!r}", path)
        _strict_keys(data, {"format", "design_point", "roots", "metrics", "nodes", "edges"}, "", path)
        metrics = {}
        for m, spec in (data.get("metrics") or {}).items():
            _strict_keys(spec, {"unit", "aggregation"}, f"metrics.{m}", path)
            metrics[m] = MetricSpec(spec["unit"], Aggregation(spec["aggregation"]))
        g = cls(design_point_ref=data.get("design_point"), metrics=metrics)
        for name, nd in (data.get("nodes") or {}).items():
            kind = nd.get("kind")
            if kind == "event":
                _strict_keys(nd, {"kind", "model", "specified"}, f"nodes.{name}", path)
                g.add_node(EventNode(name, nd.get("model"), _metric_map_in(nd.get("specified"))))
            elif kind == "module":
                _strict_keys(
                    nd,
                    {"kind", "instance", "tags", "query", "attributes", "cost", "provenance", "specified"},
                    f"nodes.{name}",
                    path,
                )
                g.add_node(ModuleNode(
                    name,
                    nd["instance"],
                    tuple(nd.get("tags") or ()),
                    dict(nd.get("query") or {}),
                    dict(nd.get("attributes") or {}),
                    _metric_map_in(nd.get("cost")),
                    nd.get("provenance"),
                    _metric_map_in(nd.get("specified")),
                ))
            else:
                raise SchemaError(f"nodes.{name}.kind", f"unknown node kind {kind!r}", path)
        for ed in data.get("edges") or []:
            _strict_keys(ed, {"parent", "child", "count", "mode", "factors"}, "edges[]", path)
            count = ed.get("count")
            g.add_edge(Edge(
                ed["parent"],
                ed["child"],
                UNSIMULATED if count is None else to_rational(count),
                Mode(ed.get("mode", "sequential")),
                {k: to_rational(v) for k, v in (ed.get("factors") or {}).items()},
            ))
        g.roots = list(data.get("roots") or [])
        return g

    def dumps(self):
        return yamlio.dumps(self.to_dict())

    @classmethod
    def loads(cls, text, path="<graph>"):
        return cls.from_dict(yamlio.loads(text, path), path)

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read(), str(path))

    def __eq__(self, other):
        return isinstance(other, AGraph) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"<AGraph {len(self.nodes)} nodes, {len(self.edges)} edges, roots={self.roots}>"


def _metric_map_out(m):
    return {k: {"value": v, "unit": u} for k, (v, u) in sorted(m.items())}


def _metric_map_in(m):
    out = {}
    for k, spec in (m or {}).items():
        out[k] = (to_rational(spec["value"]), spec["unit"])
    return out


def _strict_keys(mapping, allowed, where, path):
    if not isinstance(mapping, dict):
        raise SchemaError(where or "<root>", "expected a mapping", path)
    extra = set(mapping) - set(allowed)
    if extra:
        key = sorted(extra)[0]
        raise SchemaError(f"{where}.{key}" if where else key, "unknown key", path)


# --------------------------------------------------------------------------
# Ordering and subgraphs
# --------------------------------------------------------------------------


def find_cycle(successors):
    """Return one cycle as a node path ``[a, b, ..., a]``, or None.

    ``successors`` maps every node to an iterable of its successors.
    """
    WHITE, GREY, BLACK = 0, 1, 2
    color = {n: WHITE for n in successors}
    for start in sorted(successors):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(successors[start])))]
        path = [start]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = BLACK
                stack.pop()
                path.pop()
                continue
            if color.get(nxt, WHITE) == GREY:
                return path[path.index(nxt):] + [nxt]
            if color.get(nxt, WHITE) == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, iter(sorted(successors.get(nxt, ())))))
    return None


def topological_order(g):
    """Leaves-first order: every child precedes each of its parents.

    Ties are broken by the smallest node name among the ready nodes, so the
    result is fully determined by the graph.
    """
    remaining = {n: len(g._children[n]) for n in g.nodes}
    ready = [n for n, d in remaining.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for p in g._parents[n]:
            remaining[p] -= 1
            if remaining[p] == 0:
                heapq.heappush(ready, p)
    if len(order) != len(g.nodes):
        cycle = find_cycle({n: g._children[n] for n in g.nodes})
        raise CycleDetected(cycle or sorted(set(g.nodes) - set(order)))
    return order


def reachable(g, root):
    if root not in g.nodes:
        raise UnknownNode(root)
    seen = {root}
    queue = deque([root])
    while queue:
        n = queue.popleft()
        for c in g._children[n]:
            if c not in seen:
                seen.add(c)
                queue.append(c)
    return seen


def subgraph_from(g, root):
    """Node-induced subgraph of everything reachable from ``root``."""
    keep = reachable(g, root)
    sub = AGraph(design_point_ref=g.design_point_ref, metrics=g.metrics)
    for name in sorted(keep):
        sub.add_node(g.nodes[name])
    for (p, c), e in sorted(g.edges.items()):
        if p in keep and c in keep:
            sub.add_edge(e)
    sub.roots = [root]
    return sub


# --------------------------------------------------------------------------
# Skeleton construction
# --------------------------------------------------------------------------


def build_skeleton(event_desc, arch_desc, design_point_ref=None, metrics=None):
    """Build the unweighted graph from an event and a concrete architecture description.

    Every edge count is left ``UNSIMULATED``.  Module nodes carry their
    resolved instance shape, tags, query parameters and attributes (globals
    overridden by the module's local attributes).  Modules that no event
    references are left out of the graph.

    Raises:
        DuplicateName: an event and a module share a name, or an event lists
            the same subevent twice.
        UnresolvedSubevent: a subevent is neither an event nor a module.
        CycleDetected: the event hierarchy is cyclic.
    """
    metric_specs = {}
    if metrics is not None:
        metric_specs = {m: MetricSpec(s.unit, s.aggregation) for m, s in metrics.metrics.items()}
    g = AGraph(design_point_ref=design_point_ref, metrics=metric_specs)

    clash = sorted(set(event_desc.events) & set(arch_desc.modules))
    if clash:
        raise DuplicateName(f"{clash[0]!r} is both an event and a module")

    for name in sorted(event_desc.events):
        g.add_node(EventNode(name, event_desc.events[name].model))

    used_modules = sorted({
        s for ev in event_desc.events.values() for s in ev.subevents if s in arch_desc.modules
    })
    for name in used_modules:
        instance, tags, query, attributes = arch_desc.resolved_module(name)
        g.add_node(ModuleNode(name, instance, tuple(tags), query, attributes))

    for name in sorted(event_desc.events):
        for sub in event_desc.events[name].subevents:
            if sub not in g.nodes:
                raise UnresolvedSubevent(name, sub)
            g.add_edge(Edge(name, sub))

    topological_order(g)
    g.roots = sorted(n for n in event_desc.events if not g._parents[n])
    return g
