import json
import random

import pytest

from renormalist.config import DATA_DIR
from renormalist.graph_power import (
    MAX_VERTICES,
    Edge,
    GraphError,
    LabelledGraph,
    bound_exponent,
    check_assumptions,
    condition_values,
)
from renormalist.homogeneity import ZERO, Homogeneity as H

GRAPHS = DATA_DIR / "graphs"
VARIANCE = ["gpam_IXi", "phi43_I_cube", "phi34_I_21", "phi43_cherry"]


def load(name):
    return LabelledGraph.from_json((GRAPHS / f"{name}.json").read_text())


@pytest.mark.parametrize("name", VARIANCE)
def test_variance_fixtures_pass(name):
    assert check_assumptions(load(name)).passed


def test_variance_fixture_exponents():
    assert bound_exponent(load("gpam_IXi")) == H.parse("2-4*kappa")
    assert bound_exponent(load("phi43_I_cube")) == H.parse("1-8*kappa")
    assert bound_exponent(load("phi34_I_21")) == H.parse("2-10*kappa")
    # the cherry itself has negative degree, so its variance bound is negative
    assert bound_exponent(load("phi43_cherry")) == H.parse("-2-4*kappa")


def test_two_vertex_violation():
    res = check_assumptions(load("two_vertex_violation"))
    assert not res.passed
    assert res.condition == 1 and res.subset == ("x", "y")
    assert res.slack <= ZERO
    assert res.to_json()["subset"] == ["x", "y"]


def test_bound_exponent_arithmetic():
    G = LabelledGraph.build(
        ["*", "a", "b", "c"], "*", [], [("*", "a", "4"), ("a", "b", "4"), ("b", "c", "3")], "5"
    )
    assert bound_exponent(G) == H(4)
    assert bound_exponent(LabelledGraph.build(["*"], "*", [], [], "5")) == ZERO


def test_empty_edge_sets():
    # a free vertex with no edges fails the third family; no free vertices passes
    one_free = LabelledGraph.build(["*", "x"], "*", [], [], "5")
    res = check_assumptions(one_free)
    assert not res.passed and res.condition == 3 and res.subset == ("x",)
    none_free = LabelledGraph.build(["*", "x"], "*", ["x"], [], "5")
    assert check_assumptions(none_free).passed


def test_condition_values_direct():
    G = LabelledGraph.build(["*", "x", "y"], "*", [], [("*", "x", "1"), ("x", "y", "2"), ("x", "y", "1")], "5")
    assert condition_values(G, {"x", "y"}, 1) == (H(3), H(5))
    assert condition_values(G, {"x"}, 3) == (H(4), H(5))


@pytest.mark.parametrize(
    "vertices,star,dist,edges,message",
    [
        (["*", "*"], "*", [], [], "duplicate"),
        (["*", "x"], "z", [], [], "distinguished"),
        (["*", "x"], "*", [], [("x", "q", "1")], "unknown vertex"),
        (["*", "x"], "*", [], [("x", "x", "1")], "self-loop"),
        (["*", "x"], "*", [], [("*", "x", "-1")], "negative"),
        (["*", "x"], "*", [], [("*", "x", "1", 1)], "base point"),
        (["*", "x", "y"], "*", [], [("x", "y", "1", 1), ("y", "x", "1", 1)], "more than one"),
        (["*", "x", "y"], "*", ["x", "y"], [("x", "y", "1", 1)], "test points"),
        (["*", "x"], "*", [], [("*", "x", "1", 2)], "r must be"),
    ],
)
def test_validation_errors(vertices, star, dist, edges, message):
    with pytest.raises(GraphError, match=message):
        LabelledGraph.build(vertices, star, dist, edges, "5")


def test_vertex_limit():
    vs = ["*"] + [f"v{i}" for i in range(MAX_VERTICES)]
    with pytest.raises(GraphError):
        LabelledGraph.build(vs, "*", [], [], "5")


def test_missing_json_field():
    with pytest.raises(GraphError):
        LabelledGraph.from_json(json.dumps({"vertices": ["*"], "edges": []}))


def relabel(G, mapping):
    return LabelledGraph.build(
        [mapping[v] for v in G.vertices],
        mapping[G.star],
        [mapping[v] for v in G.distinguished],
        [Edge(mapping[e.tail], mapping[e.head], e.a, e.r) for e in G.edges],
        G.scaling_norm,
    )


@pytest.mark.parametrize("name", VARIANCE + ["two_vertex_violation"])
def test_relabelling_and_merge_order_invariance(name):
    G = load(name)
    base = check_assumptions(G)
    rng = random.Random(name)
    for _ in range(5):
        names = list(G.vertices)
        shuffled = [f"q{i}" for i in range(len(names))]
        rng.shuffle(shuffled)
        mapping = dict(zip(names, shuffled))
        H2 = relabel(G, mapping)
        res = check_assumptions(H2)
        assert res.passed == base.passed and res.condition == base.condition
        assert bound_exponent(H2) == bound_exponent(G)
        edges = list(G.edges)
        rng.shuffle(edges)
        G3 = LabelledGraph.build(G.vertices, G.star, G.distinguished, edges, G.scaling_norm)
        assert G3.merged() == G.merged()
        assert check_assumptions(G3) == base


def test_parallel_edges_merge_by_summing():
    split = LabelledGraph.build(["*", "x", "y"], "*", [], [("*", "x", "0"), ("x", "y", "2"), ("x", "y", "3")], "5")
    whole = LabelledGraph.build(["*", "x", "y"], "*", [], [("*", "x", "0"), ("x", "y", "5")], "5")
    assert split.merged() == whole.merged()
    assert check_assumptions(split) == check_assumptions(whole)


def test_json_round_trip():
    G = load("phi34_I_21")
    again = LabelledGraph.from_json(json.dumps(G.to_json()))
    assert again == G
