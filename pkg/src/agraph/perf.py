"""Performance models and the simulation pass.

A performance model is a pure function of a read-only architecture view and
a read-only workload view.  It returns, for its event, the count, aggregation
mode and per-metric factors of every subevent plus the event's own values
for ``specified`` metrics.  Simulation runs each event's model once and
writes the results onto a copy of the skeleton graph.

Models come from two places: Python functions registered by name with
``register_model``, and expression-model files referenced by relative path
from the event description.
"""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

from . import yamlio
from .costdb import CostQuery
from .errors import (
    AGraphError,
    ContractViolation,
    EvalError,
    ModelError,
    NegativeCount,
    SchemaError,
    SimulationError,
    UnknownModel,
)
from .expr import Expr
from .graph import Aggregation, Mode, ModuleNode, topological_order
from .rational import normalize, rational_text, to_rational

log = logging.getLogger(__name__)

MODEL_FORMAT = "agraph-model/1"


# --------------------------------------------------------------------------
# Result contract
# --------------------------------------------------------------------------


@dataclass
class SubeventResult:
    count: object
    mode: Mode = Mode.SEQUENTIAL
    factors: dict = field(default_factory=dict)
    specified: dict = field(default_factory=dict)  # only meaningful for module children


@dataclass
class PerformanceResult:
    specified: dict = field(default_factory=dict)  # metric -> (value, unit)
    subevents: dict = field(default_factory=dict)  # name -> SubeventResult

    @classmethod
    def from_dict(cls, d):
        """Accept the dictionary shape native models conventionally return.

        ``{'subevent': {name: {'count': c, 'aggregation': 'sequential',
        'factor': {metric: f}}}, metric: {'value': v, 'unit': u}}``
        """
        if isinstance(d, PerformanceResult):
            return d
        if not isinstance(d, dict):
            raise ContractViolation(f"model returned {type(d).__name__}, expected a mapping")
        out = cls()
        subs = None
        for key, value in d.items():
            if key in ("subevent", "subevents"):
                if subs is not None:
                    raise ContractViolation("both 'subevent' and 'subevents' given")
                subs = value or {}
            else:
                out.specified[key] = _value_unit(value, key)
        for name, sd in (subs or {}).items():
            out.subevents[name] = _subevent(name, sd)
        return out


def _value_unit(value, where):
    if isinstance(value, tuple) and len(value) == 2:
        v, u = value
    elif isinstance(value, dict) and set(value) == {"value", "unit"}:
        v, u = value["value"], value["unit"]
    else:
        raise ContractViolation(f"{where}: expected {{'value': ..., 'unit': ...}}, got {value!r}")
    try:
        return to_rational(v), str(u)
    except (TypeError, ValueError) as exc:
        raise ContractViolation(f"{where}: value is not a number ({exc})") from None


def _subevent(name, sd):
    if isinstance(sd, SubeventResult):
        return sd
    if not isinstance(sd, dict) or "count" not in sd:
        raise ContractViolation(f"subevent {name!r}: expected a mapping with a 'count'")
    extra = set(sd) - {"count", "aggregation", "factor", "factors", "specified"}
    if extra:
        raise ContractViolation(f"subevent {name!r}: unknown keys {sorted(extra)}")
    try:
        count = to_rational(sd["count"])
    except (TypeError, ValueError) as exc:
        raise ContractViolation(f"subevent {name!r}: count is not a number ({exc})") from None
    agg = sd.get("aggregation", Mode.SEQUENTIAL)
    try:
        mode = Mode(agg.value if isinstance(agg, Mode) else str(agg).lower())
    except ValueError:
        raise ContractViolation(f"subevent {name!r}: unknown aggregation {agg!r}") from None
    raw_factors = sd.get("factors", sd.get("factor")) or {}
    factors = {}
    for m, f in raw_factors.items():
        try:
            factors[m] = to_rational(f)
        except (TypeError, ValueError):
            raise ContractViolation(f"subevent {name!r}: factor {m!r} is not a number") from None
    specified = {m: _value_unit(v, f"subevent {name!r}.{m}") for m, v in (sd.get("specified") or {}).items()}
    return SubeventResult(count, mode, factors, specified)


# --------------------------------------------------------------------------
# Registry
# --------------------------------------------------------------------------

_BUILTIN = {}


def register_model(name):
    """Decorator adding a native model to the built-in registry.

    The function is called as ``fn(arch, workload, event)`` where ``event``
    is the name of the node being simulated, so one model can serve several
    events.
    """

    def deco(fn):
        if name in _BUILTIN and _BUILTIN[name] is not fn:
            raise ValueError(f"model {name!r} already registered")
        _BUILTIN[name] = fn
        fn.model_name = name
        return fn

    return deco


def builtin_models():
    _load_builtin_modules()
    return dict(_BUILTIN)


def _load_builtin_modules():
    from . import models  # noqa: F401  (registers on import)


class ModelRegistry:
    """Resolves model references: built-ins first, then expression-model files."""

    def __init__(self, builtins=None, search_dirs=()):
        self.builtins = builtin_models() if builtins is None else dict(builtins)
        self.search_dirs = [Path(d) for d in search_dirs]
        self._files = {}

    def register(self, name, fn):
        self.builtins[name] = fn

    def get(self, ref):
        if ref in self.builtins:
            return self.builtins[ref]
        for d in self.search_dirs:
            path = d / ref
            if path.is_file():
                key = str(path.resolve())
                if key not in self._files:
                    self._files[key] = ExpressionModel.load(path, ref)
                return self._files[key]
        return None


def resolve_models(event_desc, registry):
    """Mapping event name -> model for every event in the description."""
    out = {}
    for name in sorted(event_desc.events):
        ref = event_desc.events[name].model
        model = registry.get(ref) if ref else None
        if model is None:
            raise UnknownModel(name, ref)
        out[name] = model
    return out


# --------------------------------------------------------------------------
# Expression models
# --------------------------------------------------------------------------


class ExpressionModel:
    """A model written in the expression language.

    File layout::

        format: agraph-model/1
        let:                      # optional, evaluated in order
          - MA_dim: workload.inner_product.configuration.tile[0]
        specified:
          cycle_count: {value: "1", unit: cycle}
        subevents:
          MA: {count: "(32 / MA_dim) ** 3", aggregation: sequential,
               factors: {cycle_count: "2"}}

    Expressions see ``arch``, ``workload``, ``event`` and the ``let`` names.
    """

    def __init__(self, data, name="<model>"):
        self.name = name
        if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
            raise SchemaError("format", f"expected {MODEL_FORMAT!r}", name)
        extra = set(data) - {"format", "let", "specified", "subevents"}
        if extra:
            raise SchemaError(sorted(extra)[0], "unknown key", name)
        self.lets = []
        for i, item in enumerate(data.get("let") or []):
            if not isinstance(item, dict) or len(item) != 1:
                raise SchemaError(f"let[{i}]", "expected a single 'name: expression' mapping", name)
            (k, v), = item.items()
            self.lets.append((k, _expr(v, f"let.{k}")))
        self.specified = {}
        for m, spec in (data.get("specified") or {}).items():
            if not isinstance(spec, dict) or set(spec) != {"value", "unit"}:
                raise SchemaError(f"specified.{m}", "expected {value, unit}", name)
            self.specified[m] = (_expr(spec["value"], f"specified.{m}"), str(spec["unit"]))
        self.subevents = {}
        for s, spec in (data.get("subevents") or {}).items():
            if not isinstance(spec, dict) or "count" not in spec:
                raise SchemaError(f"subevents.{s}.count", "missing key", name)
            extra = set(spec) - {"count", "aggregation", "factors", "specified"}
            if extra:
                raise SchemaError(f"subevents.{s}.{sorted(extra)[0]}", "unknown key", name)
            self.subevents[s] = {
                "count": _expr(spec["count"], f"subevents.{s}.count"),
                "aggregation": spec.get("aggregation", "sequential"),
                "factors": {m: _expr(f, f"subevents.{s}.factors.{m}") for m, f in (spec.get("factors") or {}).items()},
                "specified": {
                    m: (_expr(v["value"], f"subevents.{s}.specified.{m}"), str(v["unit"]))
                    for m, v in (spec.get("specified") or {}).items()
                },
            }

    @classmethod
    def load(cls, path, name=None):
        return cls(yamlio.load_file(path), name or str(path))

    def __call__(self, arch, workload, event=None):
        env = {"arch": arch, "workload": workload, "event": event}
        for k, e in self.lets:
            env[k] = e.evaluate(env, where=f"{self.name}: let.{k}")
        result = PerformanceResult()
        for m, (e, unit) in self.specified.items():
            result.specified[m] = (to_rational(e.evaluate(env, where=f"{self.name}: specified.{m}")), unit)
        for s, spec in self.subevents.items():
            where = f"{self.name}: subevents.{s}"
            result.subevents[s] = _subevent(s, {
                "count": spec["count"].evaluate(env, where=f"{where}.count"),
                "aggregation": spec["aggregation"],
                "factors": {m: f.evaluate(env, where=f"{where}.factors.{m}") for m, f in spec["factors"].items()},
                "specified": {
                    m: {"value": e.evaluate(env, where=f"{where}.specified.{m}"), "unit": u}
                    for m, (e, u) in spec["specified"].items()
                },
            })
        return result


def _expr(value, where):
    if isinstance(value, str):
        try:
            return Expr(value)
        except EvalError as exc:
            raise EvalError(str(exc), where=where) from None
    # a bare number in the file is a constant; str() of a Fraction is "n/d", itself an expression
    try:
        return Expr(str(to_rational(value)))
    except TypeError:
        raise SchemaError(where, f"expected an expression or number, got {value!r}") from None


def evaluate_expression_model(model_file, arch, workload, event=None):
    """Load and run one expression-model file."""
    return ExpressionModel.load(model_file)(arch, workload, event)


# --------------------------------------------------------------------------
# Views
# --------------------------------------------------------------------------


def _freeze_view(value):
    if isinstance(value, dict):
        return MappingProxyType({k: _freeze_view(v) for k, v in value.items()})
    if isinstance(value, (list, tuple)):
        return tuple(_freeze_view(v) for v in value)
    return value


def architecture_view(design):
    """Read-only ``module -> {instance, tags, query, <attributes>}`` for a concrete design."""
    arch = design.architecture
    out = {}
    for name in sorted(arch.modules):
        instance, tags, query, attributes = arch.resolved_module(name)
        entry = dict(attributes)
        entry.update({"instance": list(instance), "tags": list(tags), "query": dict(query)})
        out[name] = entry
    return _freeze_view(out)


def workload_view(design):
    """Read-only ``config -> {'configuration': {param: value}}``."""
    out = {}
    for cfg, params in sorted(design.workload.configurations.items()):
        conf = {}
        for p, spec in params.items():
            if not hasattr(spec, "value"):
                raise SimulationError(f"workload {cfg}.{p} is still swept; resolve a design point first")
            conf[p] = spec.value
        out[cfg] = {"configuration": conf}
    return _freeze_view(out)


def _plain(value):
    if isinstance(value, MappingProxyType):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def _digest(*views):
    def enc(v):
        if isinstance(v, dict):
            return {k: enc(x) for k, x in sorted(v.items())}
        if isinstance(v, list):
            return [enc(x) for x in v]
        if isinstance(v, (int, str, bool)) or v is None:
            return v
        return rational_text(v)

    blob = json.dumps([enc(_plain(v)) for v in views], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


# --------------------------------------------------------------------------
# Simulation
# --------------------------------------------------------------------------


def attach_costs(graph, costs):
    """Query every module's cost record and attach the metrics the graph declares.

    This is the pre-flight pass: every module must carry each module- and
    summation-aggregated metric with the declared unit before any model runs.
    """
    required = {
        m: s.unit
        for m, s in graph.metrics.items()
        if s.aggregation in (Aggregation.MODULE, Aggregation.SUMMATION)
    }
    for node in graph.module_nodes():
        record = costs.query(CostQuery.for_module(node), required)
        node.cost = {m: record.metrics[m] for m in sorted(required)}
        node.provenance = record.provenance


def simulate(graph, design, models, costs=None, log_lines=None):
    """Run every event model once and return an annotated copy of ``graph``.

    Args:
        graph: skeleton from ``build_skeleton`` for this design point.
        design: the concrete (fully resolved) design description.
        models: mapping event name -> model, as from ``resolve_models``.
        costs: a ``CostRegistry``; when given, module cost records are
            attached first.
        log_lines: optional list collecting one line per evaluated event.

    Raises:
        ModelError: a model raised; the event is named.
        ContractViolation: a result disagrees with the skeleton's subevents
            or names an undeclared specified metric.
        NegativeCount: a subevent count is below zero.
    """
    g = copy.deepcopy(graph)
    if costs is not None:
        attach_costs(g, costs)
    arch = architecture_view(design)
    wl = workload_view(design)
    digest = _digest(arch, wl)
    specified_metrics = {m for m, s in g.metrics.items() if s.aggregation == Aggregation.SPECIFIED}
    assigned = {}  # module -> (parent, metric map) for leaf specified values
    results = {}
    for name in topological_order(g):
        node = g.nodes[name]
        if isinstance(node, ModuleNode):
            continue
        if name in results:
            continue
        model = models.get(name)
        if model is None:
            raise UnknownModel(name, node.model)
        try:
            raw = model(arch, wl, name)
            result = PerformanceResult.from_dict(raw)
        except SimulationError:
            raise
        except AGraphError as exc:
            raise ModelError(name, exc) from exc
        except Exception as exc:
            raise ModelError(name, f"{type(exc).__name__}: {exc}") from exc
        results[name] = result
        _check_result(g, name, result, specified_metrics)

        node.specified = {m: result.specified[m] for m in sorted(result.specified)}
        for child in g.children(name):
            sub = result.subevents[child]
            e = g.edge(name, child)
            e.count = normalize(sub.count)
            e.mode = sub.mode
            e.factors = {m: sub.factors[m] for m in sorted(sub.factors)}
            if sub.specified:
                child_node = g.nodes[child]
                values = {m: sub.specified[m] for m in sorted(sub.specified)}
                if child in assigned and assigned[child][1] != values:
                    raise ContractViolation(
                        f"module {child!r} given different specified values by {assigned[child][0]!r} and {name!r}"
                    )
                assigned[child] = (name, values)
                child_node.specified = values
        line = (
            f"event={name} model={node.model} inputs={digest} counts="
            + ",".join(f"{c}:{rational_text(g.edge(name, c).count)}" for c in g.children(name))
        )
        log.debug(line)
        if log_lines is not None:
            log_lines.append(line)
    return g


def _check_result(g, name, result, specified_metrics):
    expected = set(g.children(name))
    got = set(result.subevents)
    if got - expected:
        raise ContractViolation(f"event {name!r}: model names subevents not in the graph: {sorted(got - expected)}")
    if expected - got:
        raise ContractViolation(f"event {name!r}: model omits subevents: {sorted(expected - got)}")
    for m in result.specified:
        if m not in specified_metrics:
            raise ContractViolation(f"event {name!r}: {m!r} is not a declared specified metric")
    for child, sub in result.subevents.items():
        if sub.count < 0:
            raise NegativeCount(f"event {name!r}: subevent {child!r} has count {sub.count}")
        for m, f in sub.factors.items():
            if f <= 0:
                raise ContractViolation(f"event {name!r}: factor {m!r} on {child!r} must be positive, got {f}")
        if sub.specified:
            if not isinstance(g.nodes[child], ModuleNode):
                raise ContractViolation(
                    f"event {name!r}: specified values may only be assigned to module subevents, not {child!r}"
                )
            for m in sub.specified:
                if m not in specified_metrics:
                    raise ContractViolation(f"event {name!r}: {m!r} is not a declared specified metric")
