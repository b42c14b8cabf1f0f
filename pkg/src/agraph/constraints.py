"""Constraint graph and design-point enumeration.

Swept parameters are nodes; constraints are edges.  Enumeration proceeds as:

1. condition constraints are split into an injection plus an exclusion with
   the negated condition;
2. nodes connected by any constraint form a group;
3. inside a group, unconditioned injections zip their participants by index
   and every other parameter crosses freely, giving the group's base list;
   conditioned injections and exclusions then filter that list;
4. the design points are the cross product of the group lists, merged with
   the fixed parameters.

Conditioned injection: for a combination with A-side values ``a``, if some
combination in the base list with the same ``a`` satisfies the condition,
only satisfying combinations survive; otherwise ``a`` stays free and every
combination survives.  Exclusion removes combinations where the condition
holds.  See ``pair_condition`` for how groups are paired.
"""

import hashlib
import itertools
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction

from .descriptions import Constraint, is_swept, spec_values
from .errors import (
    DegenerateConstraint,
    EvalError,
    InjectionLengthMismatch,
    NonSweptParticipant,
)
from .rational import freeze, normalize
from .sweep import DEFAULT_CAP

log = logging.getLogger(__name__)


@dataclass
class ConstraintGraph:
    nodes: dict = field(default_factory=dict)  # (owner, param) -> list of values
    edges: list = field(default_factory=list)  # Constraint

    def components(self):
        """Connected groups of nodes, each sorted, ordered by their first node."""
        parent = {n: n for n in self.nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            refs = e.participants
            for r in refs[1:]:
                ra, rb = find(refs[0]), find(r)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        groups = {}
        for n in sorted(self.nodes):
            groups.setdefault(find(n), []).append(n)
        return sorted(groups.values())


@dataclass(frozen=True)
class DesignPoint:
    id: str
    assignment: dict

    @classmethod
    def from_assignment(cls, assignment):
        assignment = {k: normalize(v) for k, v in assignment.items()}
        return cls(point_id(assignment), assignment)

    def __getitem__(self, key):
        return self.assignment[key]


@dataclass(frozen=True)
class EmptySweep:
    """Diagnostic for a group whose combinations were all filtered away."""

    group: tuple
    constraint_index: int | None
    constraint: Constraint | None

    def __str__(self):
        members = ", ".join(f"{o}.{p}" for o, p in self.group)
        if self.constraint is None:
            return f"group [{members}] has no values"
        return f"group [{members}] emptied by constraint #{self.constraint_index} ({self.constraint.kind})"


# --------------------------------------------------------------------------
# Identity
# --------------------------------------------------------------------------


def _canonical(value):
    if isinstance(value, bool):
        return ["b", value]
    if isinstance(value, int):
        return ["i", str(value)]
    if isinstance(value, Fraction):
        return ["q", f"{value.numerator}/{value.denominator}"]
    if isinstance(value, str):
        return ["s", value]
    if isinstance(value, (list, tuple)):
        return ["l", [_canonical(v) for v in value]]
    if value is None:
        return ["n"]
    raise TypeError(f"cannot hash value {value!r}")


def point_id(assignment):
    """Stable content hash of an assignment; key order does not matter."""
    if hasattr(assignment, "assignment"):
        assignment = assignment.assignment
    items = sorted(
        ([owner, param], _canonical(normalize(value))) for (owner, param), value in assignment.items()
    )
    blob = json.dumps(items, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(blob.encode("ascii")).hexdigest()[:16]


# --------------------------------------------------------------------------
# Graph construction
# --------------------------------------------------------------------------


def build_constraint_graph(design, cap=DEFAULT_CAP):
    """One node per swept parameter, one edge per declared constraint."""
    params = design.parameters()
    cg = ConstraintGraph()
    for key in sorted(params):
        if is_swept(params[key]):
            cg.nodes[key] = spec_values(params[key], cap)
    for i, c in enumerate(design.constraint.constraints):
        seen = set()
        for ref in c.participants:
            if ref in seen:
                raise DegenerateConstraint(f"constraint #{i}: {ref[0]}.{ref[1]} appears more than once")
            seen.add(ref)
            if ref not in cg.nodes:
                what = "fixed" if ref in params else "unknown"
                raise NonSweptParticipant(f"constraint #{i}: {ref[0]}.{ref[1]} is {what}, not swept")
        cg.edges.append(c)
    return cg


def split_conditions(cg):
    """Replace each condition edge by an injection and a negated exclusion."""
    edges = []
    for c in cg.edges:
        if c.kind != "condition":
            edges.append(c)
            continue
        edges.append(Constraint("injection", c.a, c.b, c.condition))
        edges.append(Constraint("exclusion", c.a, c.b, _Negated(c.condition)))
    return ConstraintGraph(dict(cg.nodes), edges)


class _Negated:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, a, b):
        return not self.fn(a, b)

    def __eq__(self, other):
        return isinstance(other, _Negated) and other.fn == self.fn

    def __repr__(self):
        return f"not({self.fn!r})"


# --------------------------------------------------------------------------
# Condition pairing: the one place that decides how groups meet a predicate
# --------------------------------------------------------------------------


def pairings(a_refs, b_refs):
    """Index pairs ``(i, j)`` on which a group condition is evaluated.

    Equal-sized groups pair position by position; a single-member group is
    broadcast against every member of the other.
    """
    if len(a_refs) == len(b_refs):
        return [(i, i) for i in range(len(a_refs))]
    if len(b_refs) == 1:
        return [(i, 0) for i in range(len(a_refs))]
    if len(a_refs) == 1:
        return [(0, j) for j in range(len(b_refs))]
    raise InjectionLengthMismatch(
        f"cannot pair groups of {len(a_refs)} and {len(b_refs)} parameters"
    )


def pair_condition(constraint, combo):
    """Does ``combo`` (mapping ref -> value) satisfy the constraint's condition?

    The condition is called as ``cond(a, b)`` with single parameter values
    for every pairing and must hold for all of them.
    """
    fn = constraint.condition
    if isinstance(fn, _Negated):
        # negate the whole group condition, not each pairing
        return not pair_condition(Constraint(constraint.kind, constraint.a, constraint.b, fn.fn), combo)
    for i, j in pairings(constraint.a, constraint.b):
        try:
            ok = fn(combo[constraint.a[i]], combo[constraint.b[j]])
        except EvalError:
            raise
        except Exception as exc:
            raise EvalError(f"constraint condition raised {type(exc).__name__}: {exc}") from None
        if not ok:
            return False
    return True


# --------------------------------------------------------------------------
# Enumeration
# --------------------------------------------------------------------------


def _zip_groups(members, edges, nodes):
    """Union-find of members tied by unconditioned injections."""
    parent = {m: m for m in members}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for e in edges:
        if e.kind == "injection" and not e.conditioned:
            refs = e.participants
            for r in refs[1:]:
                ra, rb = find(refs[0]), find(r)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for m in members:
        groups.setdefault(find(m), []).append(m)
    out = []
    for g in sorted(groups.values()):
        lengths = {len(nodes[m]) for m in g}
        if len(lengths) > 1:
            detail = ", ".join(f"{o}.{p}={len(nodes[(o, p)])}" for o, p in g)
            raise InjectionLengthMismatch(f"injected parameters have unequal lengths: {detail}")
        out.append(g)
    return out


def base_combinations(members, edges, nodes):
    """Cross product of zip groups: each group contributes its aligned rows."""
    groups = _zip_groups(members, edges, nodes)
    axes = []
    for g in groups:
        n = len(nodes[g[0]])
        axes.append([{m: nodes[m][i] for m in g} for i in range(n)])
    combos = []
    for rows in itertools.product(*axes):
        combo = {}
        for row in rows:
            combo.update(row)
        combos.append(combo)
    return combos


def _filter_keep(constraint, base):
    """Boolean keep-mask over ``base`` for one conditioned constraint."""
    holds = [pair_condition(constraint, c) for c in base]
    if constraint.kind == "exclusion":
        return [not h for h in holds]
    if constraint.kind == "injection":
        matched = set()
        for c, h in zip(base, holds):
            if h:
                matched.add(freeze([c[r] for r in constraint.a]))
        return [h or freeze([c[r] for r in constraint.a]) not in matched for c, h in zip(base, holds)]
    raise ValueError(f"unsplit {constraint.kind} constraint")


def local_sweep(members, edges, nodes):
    """Combinations for one group plus the index of the first constraint that emptied it."""
    base = base_combinations(members, edges, nodes)
    keep = [True] * len(base)
    blocking = None
    if not base:
        return [], None
    for idx, e in enumerate(edges):
        if not e.conditioned:
            continue
        mask = _filter_keep(e, base)
        keep = [k and m for k, m in zip(keep, mask)]
        if blocking is None and not any(keep):
            blocking = idx
    return [c for c, k in zip(base, keep) if k], blocking


def enumerate_design_points(cg, fixed=None, diagnostics=None):
    """All viable design points, sorted by id.

    ``fixed`` maps ``(owner, param)`` to values merged into every point.  Groups
    that end up empty are appended to ``diagnostics`` (when given) as
    ``EmptySweep`` records and logged; the overall result is then empty.
    """
    cg = split_conditions(cg)
    fixed = dict(fixed or {})
    per_group = []
    empty = False
    for members in cg.components():
        member_set = set(members)
        edges = [e for e in cg.edges if set(e.participants) & member_set]
        combos, blocking = local_sweep(members, edges, cg.nodes)
        if not combos:
            empty = True
            record = EmptySweep(tuple(members), None, None)
            if blocking is not None:
                original_index = cg.edges.index(edges[blocking])
                record = EmptySweep(tuple(members), original_index, edges[blocking])
            log.warning("empty sweep: %s", record)
            if diagnostics is not None:
                diagnostics.append(record)
        per_group.append(combos)
    if empty:
        return []
    points = {}
    for parts in itertools.product(*per_group):
        assignment = dict(fixed)
        for part in parts:
            assignment.update(part)
        p = DesignPoint.from_assignment(assignment)
        points[p.id] = p
    return [points[k] for k in sorted(points)]


def count_design_points(cg):
    """Number of points ``enumerate_design_points`` would return, without building them."""
    cg = split_conditions(cg)
    total = 1
    for members in cg.components():
        member_set = set(members)
        edges = [e for e in cg.edges if set(e.participants) & member_set]
        combos, _ = local_sweep(members, edges, cg.nodes)
        total *= len({freeze(sorted(c.items())) for c in combos})
    return total
