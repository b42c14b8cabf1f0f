from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from agraph.descriptions import Design
from agraph.errors import CycleDetected, DescriptionError, DuplicateName, SchemaError, UnknownNode, UnresolvedSubevent
from agraph.graph import (
    UNSIMULATED,
    AGraph,
    Edge,
    EventNode,
    Mode,
    ModuleNode,
    build_skeleton,
    find_cycle,
    reachable,
    subgraph_from,
    topological_order,
)
from oracles import all_topological_orders, bfs_reachable, random_dag, seeded


def _concrete_mac(mac_design):
    from agraph.constraints import build_constraint_graph, enumerate_design_points

    points = enumerate_design_points(build_constraint_graph(mac_design), mac_design.fixed_parameters())
    return mac_design.resolve(points[0])


def test_mac_skeleton_shape(mac_design):
    d = _concrete_mac(mac_design)
    g = build_skeleton(d.event, d.architecture, metrics=d.metric)
    assert g.roots == ["inner_product", "outer_product"]
    assert g.children("MA") == ["acc", "ireg", "mult", "oreg", "sram", "wreg"]
    assert g.parents("MA") == ["inner_product", "outer_product"]
    assert len(g.edges) == 8
    assert all(e.count is UNSIMULATED and not e.simulated for e in g.edges.values())
    assert not g.is_simulated
    sram = g.nodes["sram"]
    assert sram.tags == ("memory",)
    assert sram.query["class"] == "sram" and "depth" in sram.query
    # architecture-level attributes land in attributes, not in the cost key
    assert sram.attributes["frequency"] == 400 and sram.attributes["interface"] == "cacti7"
    assert "interface" not in sram.query
    assert set(g.metrics) == {"area", "leakage_power", "dynamic_energy", "cycle_count", "runtime"}
    g.check()


def test_topological_order_is_leaves_first_and_deterministic(mac_design):
    d = _concrete_mac(mac_design)
    g = build_skeleton(d.event, d.architecture)
    order = topological_order(g)
    assert order == ["acc", "ireg", "mult", "oreg", "sram", "wreg", "MA", "inner_product", "outer_product"]


def _tiny(events, modules=("m",)):
    d = Design("t")
    for name, subs in events.items():
        d.event.add(name, subs, "x")
    for m in modules:
        d.architecture.add(m, [1], query={"class": "c"})
    return d


def test_self_loop_is_a_cycle():
    d = _tiny({"a": ["a", "m"]})
    with pytest.raises(CycleDetected) as info:
        build_skeleton(d.event, d.architecture)
    assert info.value.path == ["a", "a"]


def test_longer_cycle_is_reported_as_a_path():
    d = _tiny({"a": ["b"], "b": ["c"], "c": ["a", "m"]})
    with pytest.raises(CycleDetected) as info:
        build_skeleton(d.event, d.architecture)
    path = info.value.path
    assert path[0] == path[-1] and set(path) == {"a", "b", "c"}


def test_unknown_subevent_and_name_clash():
    d = _tiny({"a": ["nope"]})
    with pytest.raises(UnresolvedSubevent):
        build_skeleton(d.event, d.architecture)
    d = _tiny({"m": ["m"]})
    with pytest.raises(DuplicateName):
        build_skeleton(d.event, d.architecture)


def test_minimal_graph_and_unused_modules():
    d = _tiny({"w": ["m"]}, modules=("m", "unused"))
    g = build_skeleton(d.event, d.architecture)
    assert sorted(g.nodes) == ["m", "w"]
    assert g.roots == ["w"] and g.leaves() == ["m"]


def test_structural_guards():
    g = AGraph()
    g.add_node(EventNode("e"))
    g.add_node(ModuleNode("m", [2, 3]))
    assert g.nodes["m"].instance_product == 6
    g.add_edge(Edge("e", "m"))
    with pytest.raises(DuplicateName):
        g.add_edge(Edge("e", "m"))
    with pytest.raises(UnknownNode):
        g.add_edge(Edge("e", "ghost"))
    with pytest.raises(DescriptionError):
        g.add_edge(Edge("m", "e"))
    with pytest.raises(DescriptionError):
        ModuleNode("bad", [0])
    with pytest.raises(DescriptionError):
        ModuleNode("bad", [])


def test_check_rejects_negative_counts_and_factors():
    g = AGraph()
    g.add_node(EventNode("e"))
    g.add_node(ModuleNode("m", [1]))
    g.add_edge(Edge("e", "m", -1))
    g.roots = ["e"]
    with pytest.raises(DescriptionError, match="negative"):
        g.check()
    g.edges[("e", "m")].count = 1
    g.edges[("e", "m")].factors = {"x": 0}
    with pytest.raises(DescriptionError, match="factor"):
        g.check()


def test_serialisation_round_trip_keeps_exact_values(tmp_path):
    g = random_dag(seeded(3))
    g.design_point_ref = "abc"
    g.save(tmp_path / "g.agraph")
    back = AGraph.load(tmp_path / "g.agraph")
    assert back == g
    assert back.dumps() == g.dumps()
    e = next(iter(back.edges.values()))
    assert isinstance(e.mode, Mode)


def test_unsimulated_counts_serialise_as_null():
    g = AGraph()
    g.add_node(EventNode("e"))
    g.add_node(ModuleNode("m", [1]))
    g.add_edge(Edge("e", "m"))
    text = g.dumps()
    assert "count: null" in text
    assert AGraph.loads(text).edge("e", "m").count is UNSIMULATED


def test_unknown_keys_are_schema_errors():
    g = AGraph()
    g.add_node(EventNode("e"))
    data = g.to_dict()
    data["nodes"]["e"]["colour"] = "red"
    with pytest.raises(SchemaError):
        AGraph.from_dict(data)
    with pytest.raises(SchemaError):
        AGraph.from_dict({"format": "other"})


def test_subgraph_from_keeps_reachable_part():
    g = random_dag(seeded(11), max_nodes=10)
    sub = subgraph_from(g, "n00")
    keep = bfs_reachable(list(g.edges), "n00")
    assert set(sub.nodes) == keep
    assert set(sub.edges) == {k for k in g.edges if k[0] in keep}
    assert sub.roots == ["n00"]


def test_find_cycle_on_acyclic_input():
    assert find_cycle({"a": ["b"], "b": []}) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_topological_order_is_one_of_the_brute_force_orders(seed):
    g = random_dag(seeded(seed), max_nodes=7)
    orders = all_topological_orders(list(g.nodes), list(g.edges))
    assert topological_order(g) in orders
    assert topological_order(g) == topological_order(AGraph.loads(g.dumps()))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_reachable_matches_bfs(seed):
    g = random_dag(seeded(seed))
    for root in g.nodes:
        assert reachable(g, root) == bfs_reachable(list(g.edges), root)


def test_counts_accept_exact_fractions():
    e = Edge("a", "b", Fraction(1, 2))
    assert e.simulated and e.factor("x") == 1
