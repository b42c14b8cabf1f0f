"""Design descriptions: workload, event, architecture, metric and constraint.

The classes double as a programmatic front end::

    design = Design("mac_array")
    architecture, event, metric, workload = design.get_descriptions()
    constraint = design.get_constraint_graph()

    workload.config(name=["inner_product"])
    workload.add(config="inner_product", param_name="batch",
                 param_value=IterationSweep(1, 5, "x * 2"))
    event.add(name="inner_product", subevent=["MA"], performance_model="mac_array.product")
    architecture.attr(technology=45, frequency=400, interface="cmos")
    architecture.add(name="mult", inst=[[2, 2], [4, 4]], tag=["pe"],
                     query={"class": "multiplier"})
    metric.add(name="area", unit="mm^2", aggregation="module")

and the same state can be written to / read from a design directory holding
``workload.desc``, ``event.desc``, ``architecture.desc``, ``metric.desc`` and
``constraint.desc``.
"""

import os
import shutil
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import yamlio
from .errors import (
    AGraphError,
    DescriptionError,
    NotSerializable,
    OverwriteRefused,
    ParseError,
    SchemaError,
)
from .expr import Expr, as_callable
from .graph import Aggregation, MetricSpec, find_cycle
from .rational import normalize
from .sweep import DEFAULT_CAP, SWEEP_KEYS, SWEEP_TYPES, sweep_from_dict

FORMATS = {
    "workload": "agraph-workload/1",
    "event": "agraph-event/1",
    "architecture": "agraph-architecture/1",
    "metric": "agraph-metric/1",
    "constraint": "agraph-constraint/1",
    "manifest": "agraph-manifest/1",
}

INSTANCE = "instance"
# query keys that are attributes even when no global of that name exists
ATTRIBUTE_KEYS = frozenset({"technology", "frequency", "interface"})


# --------------------------------------------------------------------------
# Parameter specifications
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Fixed:
    value: object

    def __post_init__(self):
        object.__setattr__(self, "value", normalize(self.value))


@dataclass(frozen=True)
class Swept:
    """An explicit list of alternative values."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(normalize(list(self.values))))


def param_spec(value, sweep=False):
    """Interpret a front-end parameter value.

    Sweep objects and explicit specs pass through.  A list becomes a swept
    value list when ``sweep`` is true and a single fixed value otherwise.
    """
    if isinstance(value, (Fixed, Swept) + SWEEP_TYPES):
        return value
    if sweep:
        if not isinstance(value, (list, tuple)):
            raise DescriptionError(f"sweep=True needs a list of values, got {value!r}")
        return Swept(tuple(value))
    return Fixed(value)


def is_swept(spec):
    return not isinstance(spec, Fixed)


def spec_values(spec, cap=DEFAULT_CAP):
    """The ordered candidate values of a parameter."""
    if isinstance(spec, Fixed):
        return [spec.value]
    if isinstance(spec, Swept):
        return list(spec.values)
    return spec.expand(cap)


def _spec_out(spec, where):
    if isinstance(spec, Fixed):
        if isinstance(spec.value, dict):
            raise NotSerializable(f"{where}: mapping-valued parameters are not supported")
        return spec.value
    if isinstance(spec, Swept):
        return {"values": list(spec.values), "sweep": True}
    try:
        return spec.to_dict()
    except NotSerializable as exc:
        raise NotSerializable(f"{where}: {exc}") from None


def _spec_in(raw, where, path):
    if not isinstance(raw, dict):
        return Fixed(raw)
    if "sweep" not in raw:
        raise SchemaError(where, "mapping parameter needs a 'sweep' key", path)
    flag = raw["sweep"]
    if isinstance(flag, bool):
        _strict(raw, {"values", "sweep"}, where, path)
        if "values" not in raw or not isinstance(raw["values"], list):
            raise SchemaError(f"{where}.values", "expected a list", path)
        return Swept(tuple(raw["values"])) if flag else Fixed(raw["values"])
    if flag not in SWEEP_KEYS:
        raise SchemaError(f"{where}.sweep", f"unknown sweep kind {flag!r}", path)
    _strict(raw, SWEEP_KEYS[flag], where, path)
    missing = SWEEP_KEYS[flag] - set(raw)
    if missing:
        raise SchemaError(f"{where}.{sorted(missing)[0]}", "missing key", path)
    return sweep_from_dict(raw)


def _strict(mapping, allowed, where, path):
    if not isinstance(mapping, dict):
        raise SchemaError(where or "<root>", "expected a mapping", path)
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        raise SchemaError(f"{where}.{extra[0]}" if where else extra[0], "unknown key", path)


# --------------------------------------------------------------------------
# The four descriptions plus constraints
# --------------------------------------------------------------------------


@dataclass
class WorkloadDescription:
    configurations: dict = field(default_factory=dict)

    def config(self, name):
        for n in [name] if isinstance(name, str) else name:
            if n in self.configurations:
                raise DescriptionError(f"workload configuration {n!r} already exists")
            self.configurations[n] = {}

    def add(self, config, param_name, param_value, sweep=False):
        params = self.configurations.setdefault(config, {})
        if param_name in params:
            raise DescriptionError(f"parameter {param_name!r} already set for {config!r}")
        params[param_name] = param_spec(param_value, sweep)


@dataclass
class EventSpec:
    subevents: list
    model: str | None = None


@dataclass
class EventDescription:
    events: dict = field(default_factory=dict)

    def add(self, name, subevent, performance_model=None, performance_path=None):
        if name in self.events:
            raise DescriptionError(f"event {name!r} already exists")
        subs = [subevent] if isinstance(subevent, str) else list(subevent)
        self.events[name] = EventSpec(subs, performance_model or performance_path)


@dataclass
class ModuleSpec:
    instance: object  # parameter spec over integer lists
    tags: tuple = ()
    query: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tags = tuple(sorted(set(self.tags)))


@dataclass
class ArchitectureDescription:
    attributes: dict = field(default_factory=dict)
    modules: dict = field(default_factory=dict)

    def attr(self, **attributes):
        self.attributes.update(normalize(attributes))

    def add(self, name, inst, tag=(), query=None):
        """Add one module, or several sharing a spec when ``name`` is a list.

        ``inst`` is a list of integers (fixed), a list of such lists (swept)
        or a sweep object.  List values inside ``query`` are swept.
        """
        if isinstance(inst, (list, tuple)) and inst and isinstance(inst[0], (list, tuple)):
            instance = Swept(tuple(inst))
        else:
            instance = param_spec(inst)
        q = {}
        for k, v in (query or {}).items():
            q[k] = v if k == "class" else param_spec(v, sweep=isinstance(v, (list, tuple)))
        tags = [tag] if isinstance(tag, str) else list(tag)
        for n in [name] if isinstance(name, str) else name:
            if n in self.modules:
                raise DescriptionError(f"module {n!r} already exists")
            self.modules[n] = ModuleSpec(instance, tuple(tags), dict(q))

    def is_attribute(self, key):
        return key in ATTRIBUTE_KEYS or key in self.attributes

    def resolved_module(self, name):
        """``(instance, tags, query, attributes)`` for a module with all parameters fixed."""
        spec = self.modules[name]
        if not isinstance(spec.instance, Fixed):
            raise DescriptionError(f"module {name!r}: instance is still swept; resolve a design point first")
        query = {}
        attributes = dict(self.attributes)
        for k, v in spec.query.items():
            if k == "class":
                query[k] = v
                continue
            if not isinstance(v, Fixed):
                raise DescriptionError(f"module {name!r}: query.{k} is still swept")
            if self.is_attribute(k):
                attributes[k] = v.value
            else:
                query[k] = v.value
        return spec.instance.value, spec.tags, query, attributes


@dataclass
class MetricDescription:
    metrics: dict = field(default_factory=dict)  # name -> MetricSpec

    def add(self, name, unit, aggregation):
        if name in self.metrics:
            raise DescriptionError(f"metric {name!r} already exists")
        try:
            agg = Aggregation(aggregation)
        except ValueError:
            agg = aggregation  # kept verbatim so validation can report it
        self.metrics[name] = MetricSpec(unit, agg)


CONSTRAINT_KINDS = ("injection", "exclusion", "condition")


@dataclass
class Constraint:
    """One constraint between parameter groups ``a`` and ``b``.

    With no condition and an empty ``b`` an injection zips all of ``a``
    index by index.
    """

    kind: str
    a: tuple
    b: tuple = ()
    condition: object = None

    def __post_init__(self):
        self.a = tuple((o, _canon_param(p)) for o, p in self.a)
        self.b = tuple((o, _canon_param(p)) for o, p in self.b)
        if self.condition is not None:
            self.condition = as_callable(self.condition, ("a", "b"))

    @property
    def participants(self):
        return self.a + self.b

    @property
    def conditioned(self):
        return self.condition is not None


def _canon_param(p):
    return INSTANCE if p == "inst" else p


@dataclass
class ConstraintSpec:
    constraints: list = field(default_factory=list)

    def add(self, a_params=None, b_params=None, type="injection", cond=None, **owner_params):
        """Front-end form of a constraint.

        ``add(x='tile', y='inst')`` zips the listed parameters;
        ``add(sram=['width', 'depth'], cond=...)`` relates two parameters of
        one owner; ``add(a_params={...}, b_params={...}, type=..., cond=...)``
        relates two groups.
        """
        if a_params is not None or b_params is not None:
            a = tuple((o, p) for o, p in (a_params or {}).items())
            b = tuple((o, p) for o, p in (b_params or {}).items())
        elif len(owner_params) == 1 and isinstance(next(iter(owner_params.values())), (list, tuple)):
            owner, params = next(iter(owner_params.items()))
            if len(params) != 2:
                raise DescriptionError("single-owner form relates exactly two parameters")
            a, b = ((owner, params[0]),), ((owner, params[1]),)
        else:
            a = tuple((o, p) for o, p in owner_params.items())
            b = ()
        c = Constraint(type, a, b, cond)
        self.constraints.append(c)
        return c


@dataclass
class DesignDescription:
    name: str
    workload: WorkloadDescription = field(default_factory=WorkloadDescription)
    event: EventDescription = field(default_factory=EventDescription)
    architecture: ArchitectureDescription = field(default_factory=ArchitectureDescription)
    metric: MetricDescription = field(default_factory=MetricDescription)
    constraint: ConstraintSpec = field(default_factory=ConstraintSpec)
    source_dir: str | None = field(default=None, compare=False)

    # front-end accessors in the order the walkthrough uses them
    def get_descriptions(self):
        return self.architecture, self.event, self.metric, self.workload

    def get_constraint_graph(self):
        return self.constraint

    def parameters(self):
        """Every ``(owner, parameter) -> spec`` across workloads and modules."""
        out = {}
        for cfg, params in self.workload.configurations.items():
            for p, spec in params.items():
                out[(cfg, p)] = spec
        for m, mod in self.architecture.modules.items():
            out[(m, INSTANCE)] = mod.instance
            for k, v in mod.query.items():
                if k != "class":
                    out[(m, k)] = v
        return out

    def swept_parameters(self):
        return {k: v for k, v in self.parameters().items() if is_swept(v)}

    def fixed_parameters(self):
        return {k: v.value for k, v in self.parameters().items() if not is_swept(v)}

    @property
    def is_concrete(self):
        return not self.swept_parameters()

    def resolve(self, point):
        """A concrete copy with every swept parameter replaced by the point's value."""
        assignment = point.assignment if hasattr(point, "assignment") else point
        workload = WorkloadDescription({
            cfg: {p: _fix(spec, assignment, (cfg, p)) for p, spec in params.items()}
            for cfg, params in self.workload.configurations.items()
        })
        modules = {}
        for m, mod in self.architecture.modules.items():
            query = {
                k: (v if k == "class" else _fix(v, assignment, (m, k))) for k, v in mod.query.items()
            }
            modules[m] = ModuleSpec(_fix(mod.instance, assignment, (m, INSTANCE)), mod.tags, query)
        return replace(
            self,
            workload=workload,
            architecture=ArchitectureDescription(dict(self.architecture.attributes), modules),
            constraint=ConstraintSpec(),
        )

    def generate(self, out_dir, force=False, max_points=None):
        """Enumerate design points and emit their files; returns the manifest."""
        from .pipeline import generate

        return generate(self, out_dir, force=force, max_points=max_points)


Design = DesignDescription


def _fix(spec, assignment, key):
    if not is_swept(spec):
        return spec
    if key not in assignment:
        raise DescriptionError(f"design point does not assign {key[0]}.{key[1]}")
    return Fixed(assignment[key])


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    code: str
    where: str
    message: str

    def __str__(self):
        return f"[{self.code}] {self.where}: {self.message}"


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.findings

    def codes(self):
        return [f.code for f in self.findings]

    def add(self, code, where, message):
        self.findings.append(Finding(code, where, message))

    def __str__(self):
        return "valid" if self.ok else "\n".join(str(f) for f in self.findings)


def validate(design, cap=DEFAULT_CAP):
    """Check cross references and return every violation found.  Never raises."""
    report = ValidationReport()
    for check in (_check_names, _check_events, _check_modules, _check_metrics, _check_params):
        try:
            check(design, report, cap)
        except AGraphError as exc:
            report.add(type(exc).__name__, check.__name__.replace("_check_", ""), str(exc))
        except Exception as exc:  # validation must stay total
            report.add("InternalError", check.__name__.replace("_check_", ""), repr(exc))
    try:
        _check_constraints(design, report, cap)
    except Exception as exc:
        report.add("InternalError", "constraints", repr(exc))
    return report


def validate_path(path, cap=DEFAULT_CAP):
    """Load and validate a design directory; load failures become findings."""
    try:
        design = load_design(path)
    except AGraphError as exc:
        report = ValidationReport()
        report.add(type(exc).__name__, str(path), str(exc))
        return report
    except Exception as exc:
        report = ValidationReport()
        report.add("InternalError", str(path), repr(exc))
        return report
    return validate(design, cap)


def _check_names(design, report, cap):
    events = set(design.event.events)
    modules = set(design.architecture.modules)
    configs = set(design.workload.configurations)
    for n in sorted(events & modules):
        report.add("DuplicateName", n, "name used by both an event and a module")
    for n in sorted(configs & modules):
        report.add("DuplicateName", n, "name used by both a workload configuration and a module")


def _check_events(design, report, cap):
    events = design.event.events
    modules = design.architecture.modules
    children = {}
    for name, ev in sorted(events.items()):
        if not ev.subevents:
            report.add("EmptySubevents", f"event.{name}", "event has no subevents")
        if not ev.model:
            report.add("MissingModel", f"event.{name}", "event has no performance model")
        if len(set(ev.subevents)) != len(ev.subevents):
            report.add("DuplicateName", f"event.{name}", "subevent listed twice")
        for s in ev.subevents:
            if s not in events and s not in modules:
                report.add("UnresolvedSubevent", f"event.{name}", f"unknown subevent {s!r}")
        children[name] = [s for s in ev.subevents if s in events]
    cycle = find_cycle(children)
    if cycle:
        report.add("CycleDetected", "event", " -> ".join(cycle))
    referenced = {s for ev in events.values() for s in ev.subevents}
    for name in sorted(events):
        if name not in referenced and name not in design.workload.configurations:
            report.add("RootNotWorkload", f"event.{name}", "root event has no workload configuration")
    for cfg in sorted(design.workload.configurations):
        if cfg not in events:
            report.add("UnresolvedSubevent", f"workload.{cfg}", "workload configuration has no root event")
        elif cfg in referenced:
            report.add("RootNotWorkload", f"workload.{cfg}", "workload event is a subevent of another event")


def _check_modules(design, report, cap):
    for name, mod in sorted(design.architecture.modules.items()):
        cls = mod.query.get("class")
        if not isinstance(cls, str) or not cls:
            report.add("MissingQueryClass", f"architecture.{name}.query.class", "query must name a class")
        for value in _safe_values(mod.instance, report, f"architecture.{name}.instance", cap):
            if not (
                isinstance(value, list)
                and value
                and all(isinstance(i, int) and not isinstance(i, bool) and i >= 1 for i in value)
            ):
                report.add(
                    "InvalidInstance",
                    f"architecture.{name}.instance",
                    f"instance must be a non-empty list of positive integers, got {value!r}",
                )
                break


def _check_metrics(design, report, cap):
    for name, spec in sorted(design.metric.metrics.items()):
        if not isinstance(spec.aggregation, Aggregation):
            report.add(
                "UnknownAggregationKind",
                f"metric.{name}",
                f"aggregation {spec.aggregation!r} is not one of module, summation, specified",
            )
        if not isinstance(spec.unit, str) or not spec.unit:
            report.add("MissingUnit", f"metric.{name}", "metric needs a unit")


def _check_params(design, report, cap):
    for (owner, p), spec in sorted(design.swept_parameters().items()):
        _safe_values(spec, report, f"{owner}.{p}", cap)


def _safe_values(spec, report, where, cap):
    try:
        values = spec_values(spec, cap)
    except AGraphError as exc:
        report.add(type(exc).__name__, where, str(exc))
        return []
    if is_swept(spec) and not values:
        report.add("EmptySweep", where, "sweep produces no values")
    return values


def _check_constraints(design, report, cap):
    params = design.parameters()
    for i, c in enumerate(design.constraint.constraints):
        where = f"constraint[{i}]"
        if c.kind not in CONSTRAINT_KINDS:
            report.add("UnknownConstraintKind", where, f"kind {c.kind!r}")
        if c.kind in ("exclusion", "condition") and c.condition is None:
            report.add("ConditionRequired", where, f"{c.kind} constraints need a condition")
        if not c.a:
            report.add("EmptyConstraint", where, "constraint has no participants")
        if c.condition is not None and (not c.a or not c.b):
            report.add("ConditionRequired", where, "a conditioned constraint needs both a and b groups")
        if c.a and c.b and len(c.a) != len(c.b) and 1 not in (len(c.a), len(c.b)):
            report.add(
                "GroupCardinality",
                where,
                f"groups of {len(c.a)} and {len(c.b)} parameters can be neither paired nor broadcast",
            )
        seen = set()
        for ref in c.participants:
            label = f"{ref[0]}.{ref[1]}"
            if ref in seen:
                report.add("DegenerateConstraint", where, f"{label} appears more than once")
            seen.add(ref)
            if ref not in params:
                report.add("UnknownParticipant", where, f"{label} is not a parameter")
            elif not is_swept(params[ref]):
                report.add("NonSweptParticipant", where, f"{label} is fixed, not swept")


# --------------------------------------------------------------------------
# On-disk format
# --------------------------------------------------------------------------


def workload_to_dict(w):
    return {
        "format": FORMATS["workload"],
        "configurations": {
            cfg: {p: _spec_out(s, f"workload.{cfg}.{p}") for p, s in params.items()}
            for cfg, params in w.configurations.items()
        },
    }


def event_to_dict(e):
    return {
        "format": FORMATS["event"],
        "events": {n: {"subevents": list(ev.subevents), "model": ev.model} for n, ev in e.events.items()},
    }


def architecture_to_dict(a):
    modules = {}
    for n, m in a.modules.items():
        query = {k: (v if k == "class" else _spec_out(v, f"architecture.{n}.query.{k}")) for k, v in m.query.items()}
        modules[n] = {
            "instance": _spec_out(m.instance, f"architecture.{n}.instance"),
            "tags": list(m.tags),
            "query": query,
        }
    return {"format": FORMATS["architecture"], "attributes": dict(a.attributes), "modules": modules}


def metric_to_dict(m):
    return {
        "format": FORMATS["metric"],
        "metrics": {
            n: {
                "unit": s.unit,
                "aggregation": s.aggregation.value if isinstance(s.aggregation, Aggregation) else s.aggregation,
            }
            for n, s in m.metrics.items()
        },
    }


def constraint_to_dict(c):
    items = []
    for i, k in enumerate(c.constraints):
        item = {"kind": k.kind, "a": [list(r) for r in k.a]}
        if k.b:
            item["b"] = [list(r) for r in k.b]
        if k.condition is not None:
            if not isinstance(k.condition, Expr):
                raise NotSerializable(f"constraint[{i}]: native condition cannot be serialised")
            item["condition"] = k.condition.source
        items.append(item)
    return {"format": FORMATS["constraint"], "constraints": items}


def _header(raw, kind, keys, path):
    _strict(raw, {"format"} | set(keys), "", path)
    if raw.get("format") != FORMATS[kind]:
        raise SchemaError("format", f"expected {FORMATS[kind]!r}, got {raw.get('format')!r}", path)


def workload_from_dict(raw, path="<workload>"):
    _header(raw, "workload", {"configurations"}, path)
    confs = raw.get("configurations") or {}
    _strict(confs, set(confs), "configurations", path)
    out = WorkloadDescription()
    for cfg, params in confs.items():
        _strict(params or {}, set(params or {}), f"configurations.{cfg}", path)
        out.configurations[cfg] = {
            p: _spec_in(v, f"configurations.{cfg}.{p}", path) for p, v in (params or {}).items()
        }
    return out


def event_from_dict(raw, path="<event>"):
    _header(raw, "event", {"events"}, path)
    out = EventDescription()
    events = raw.get("events") or {}
    _strict(events, set(events), "events", path)
    for n, ev in events.items():
        _strict(ev, {"subevents", "model"}, f"events.{n}", path)
        subs = ev.get("subevents")
        if not isinstance(subs, list) or not all(isinstance(s, str) for s in subs):
            raise SchemaError(f"events.{n}.subevents", "expected a list of names", path)
        out.events[n] = EventSpec(list(subs), ev.get("model"))
    return out


def architecture_from_dict(raw, path="<architecture>"):
    _header(raw, "architecture", {"attributes", "modules"}, path)
    attrs = raw.get("attributes") or {}
    _strict(attrs, set(attrs), "attributes", path)
    out = ArchitectureDescription(dict(attrs))
    modules = raw.get("modules") or {}
    _strict(modules, set(modules), "modules", path)
    for n, m in modules.items():
        _strict(m, {"instance", "tags", "query"}, f"modules.{n}", path)
        if "instance" not in m:
            raise SchemaError(f"modules.{n}.instance", "missing key", path)
        query = m.get("query")
        if not isinstance(query, dict) or "class" not in query:
            raise SchemaError(f"modules.{n}.query.class" if isinstance(query, dict) else "query.class",
                              "query must specify a class", path)
        q = {k: (v if k == "class" else _spec_in(v, f"modules.{n}.query.{k}", path)) for k, v in query.items()}
        tags = m.get("tags") or []
        if not isinstance(tags, list):
            raise SchemaError(f"modules.{n}.tags", "expected a list", path)
        out.modules[n] = ModuleSpec(_spec_in(m["instance"], f"modules.{n}.instance", path), tuple(tags), q)
    return out


def metric_from_dict(raw, path="<metric>"):
    _header(raw, "metric", {"metrics"}, path)
    out = MetricDescription()
    metrics = raw.get("metrics") or {}
    for n, s in metrics.items():
        _strict(s, {"unit", "aggregation"}, f"metrics.{n}", path)
        for key in ("unit", "aggregation"):
            if key not in s:
                raise SchemaError(f"metrics.{n}.{key}", "missing key", path)
        out.add(n, s["unit"], s["aggregation"])
    return out


def constraint_from_dict(raw, path="<constraint>"):
    _header(raw, "constraint", {"constraints"}, path)
    out = ConstraintSpec()
    for i, item in enumerate(raw.get("constraints") or []):
        where = f"constraints[{i}]"
        _strict(item, {"kind", "a", "b", "condition"}, where, path)
        for key in ("kind", "a"):
            if key not in item:
                raise SchemaError(f"{where}.{key}", "missing key", path)
        refs = []
        for side in ("a", "b"):
            group = item.get(side) or []
            if not isinstance(group, list) or not all(
                isinstance(r, list) and len(r) == 2 and all(isinstance(x, str) for x in r) for r in group
            ):
                raise SchemaError(f"{where}.{side}", "expected a list of [owner, parameter] pairs", path)
            refs.append(tuple(tuple(r) for r in group))
        cond = item.get("condition")
        out.constraints.append(
            Constraint(item["kind"], refs[0], refs[1], None if cond is None else Expr(str(cond), ("a", "b")))
        )
    return out


_KINDS = {
    "workload": (workload_to_dict, workload_from_dict),
    "event": (event_to_dict, event_from_dict),
    "architecture": (architecture_to_dict, architecture_from_dict),
    "metric": (metric_to_dict, metric_from_dict),
    "constraint": (constraint_to_dict, constraint_from_dict),
}


def read_desc(path, kind):
    path = Path(path)
    if not path.exists():
        raise ParseError(path, 0, "file not found")
    raw = yamlio.load_file(path)
    if not isinstance(raw, dict):
        raise SchemaError("<root>", "expected a mapping", path)
    return _KINDS[kind][1](raw, str(path))


def write_desc(obj, path, kind):
    yamlio.dump_file(_KINDS[kind][0](obj), path)


def save_design(design, directory):
    """Write the five description files of ``design`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    texts = {kind: yamlio.dumps(_KINDS[kind][0](getattr(design, kind))) for kind in _KINDS}
    for kind, text in texts.items():
        (directory / f"{kind}.desc").write_text(text, encoding="utf-8")


def load_design(directory, name=None):
    """Read a design directory.  ``constraint.desc`` may be absent."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(directory, 0, "design directory not found")
    parts = {}
    for kind in _KINDS:
        path = directory / f"{kind}.desc"
        if kind == "constraint" and not path.exists():
            parts[kind] = ConstraintSpec()
            continue
        parts[kind] = read_desc(path, kind)
    return DesignDescription(name or directory.name, source_dir=str(directory), **parts)


# --------------------------------------------------------------------------
# Design-point files
# --------------------------------------------------------------------------


def _model_files(design):
    """Relative paths of expression-model files the event description references."""
    if not design.source_dir:
        return []
    out = []
    for ev in design.event.events.values():
        if ev.model and (Path(design.source_dir) / ev.model).is_file():
            out.append(ev.model)
    return sorted(set(out))


def emit_design_point_files(design, points, out_dir, force=False):
    """Write shared event/metric files and one workload + architecture file per point.

    Returns the manifest mapping (also written to ``manifest.desc``).  All
    paths in it are relative to ``out_dir``.
    """
    out_dir = Path(out_dir)
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise OverwriteRefused(f"{out_dir} is not empty (use force to overwrite)")
        shutil.rmtree(out_dir)
    (out_dir / "shared").mkdir(parents=True, exist_ok=True)
    write_desc(design.event, out_dir / "shared" / "event.desc", "event")
    write_desc(design.metric, out_dir / "shared" / "metric.desc", "metric")
    for rel in _model_files(design):
        dst = out_dir / "shared" / rel
        dst.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(Path(design.source_dir) / rel, dst)

    entries = []
    for point in sorted(points, key=lambda p: p.id):
        concrete = design.resolve(point)
        rel = Path("points") / point.id
        (out_dir / rel).mkdir(parents=True, exist_ok=True)
        write_desc(concrete.workload, out_dir / rel / "workload.desc", "workload")
        write_desc(concrete.architecture, out_dir / rel / "architecture.desc", "architecture")
        entries.append({
            "id": point.id,
            "workload": (rel / "workload.desc").as_posix(),
            "architecture": (rel / "architecture.desc").as_posix(),
        })
    manifest = {
        "format": FORMATS["manifest"],
        "design": design.name,
        "shared": {"event": "shared/event.desc", "metric": "shared/metric.desc"},
        "points": entries,
    }
    yamlio.dump_file(manifest, out_dir / "manifest.desc")
    return manifest


def load_manifest(path):
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.desc"
    raw = yamlio.load_file(path)
    _header(raw, "manifest", {"design", "shared", "points"}, str(path))
    return raw, path.parent


def load_point(manifest_dir, manifest, entry):
    """Concrete ``DesignDescription`` for one manifest entry."""
    base = Path(manifest_dir)
    return DesignDescription(
        manifest["design"],
        workload=read_desc(base / entry["workload"], "workload"),
        event=read_desc(base / manifest["shared"]["event"], "event"),
        architecture=read_desc(base / entry["architecture"], "architecture"),
        metric=read_desc(base / manifest["shared"]["metric"], "metric"),
        source_dir=os.fspath(base / "shared"),
    )
