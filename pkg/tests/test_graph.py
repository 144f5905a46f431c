import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graph_yamabe import build_graph, decompose_domain, degree, integrate, volume
from graph_yamabe.errors import (
    DisconnectedDomain,
    DuplicateEdge,
    DuplicateVertex,
    EmptyDomain,
    NonPositiveMeasure,
    NonPositiveWeight,
    SelfLoop,
    UnknownVertex,
    UnknownVertexInEdge,
)
from graph_yamabe.io import generate_graph


def spec(vertices, edges):
    return {
        "vertices": [{"id": v, "mu": m} for v, m in vertices],
        "edges": [{"u": a, "v": b, "w": w} for a, b, w in edges],
    }


@pytest.fixture
def abc():
    return build_graph(spec([("a", 1), ("b", 1), ("c", 1)], [("a", "b", 1), ("b", "c", 1)]))


@pytest.fixture
def path5():
    names = "abcde"
    return build_graph(spec([(x, 1) for x in names],
                            [(names[i], names[i + 1], 1) for i in range(4)]))


def test_build_path(abc):
    assert abc.n == 3 and abc.n_edges == 2
    assert abc.ids == ("a", "b", "c")


def test_ids_are_sorted():
    g = build_graph(spec([("z", 1), ("a", 2)], [("z", "a", 3)]))
    assert g.ids == ("a", "z")
    assert g.mu.tolist() == [2.0, 1.0]


@pytest.mark.parametrize("bad, exc", [
    (spec([("a", 1), ("b", 1)], [("a", "b", 1), ("b", "a", 2)]), DuplicateEdge),
    (spec([("a", 0), ("b", 1)], [("a", "b", 1)]), NonPositiveMeasure),
    (spec([("a", 1), ("b", 1)], [("a", "b", -1)]), NonPositiveWeight),
    (spec([("a", 1), ("b", 1)], [("a", "a", 1)]), SelfLoop),
    (spec([("a", 1)], [("a", "q", 1)]), UnknownVertexInEdge),
    (spec([("a", 1), ("a", 2)], []), DuplicateVertex),
    (spec([("a", float("nan"))], []), NonPositiveMeasure),
])
def test_build_rejects(bad, exc):
    with pytest.raises(exc):
        build_graph(bad)


def test_repeated_edge_with_equal_weight_is_tolerated():
    g = build_graph(spec([("a", 1), ("b", 1)], [("a", "b", 1.5), ("b", "a", 1.5)]))
    assert g.n_edges == 1


def test_graph_is_immutable(abc):
    with pytest.raises(ValueError):
        abc.mu[0] = 5.0


def test_degree(abc):
    assert degree(abc, "b") == 2
    assert degree(abc, "a") == 1
    star = build_graph(spec([("c", 1)] + [(f"l{i}", 1) for i in range(5)],
                            [("c", f"l{i}", 1) for i in range(5)]))
    assert degree(star, "c") == 5
    with pytest.raises(UnknownVertex):
        degree(abc, "zz")


def test_decompose_path(path5):
    d = decompose_domain(path5, ["b", "c", "d"])
    assert d.boundary == ("b", "d")
    assert d.interior == ("c",)
    assert d.omega == ("b", "c", "d")


def test_decompose_whole_graph(path5):
    d = decompose_domain(path5, path5.ids)
    assert d.boundary == ()
    assert d.interior == path5.ids


def test_decompose_errors(abc):
    with pytest.raises(DisconnectedDomain):
        decompose_domain(abc, ["a", "c"])
    with pytest.raises(EmptyDomain):
        decompose_domain(abc, [])
    d = decompose_domain(abc, ["a", "c"], allow_disconnected=True)
    assert d.boundary == ("a", "c")


def test_integrate_and_volume():
    g = build_graph(spec([("a", 1), ("b", 1), ("c", 1)], [("a", "b", 1), ("b", "c", 1)]))
    assert integrate(g, None, [1, 2, 3]) == 6
    assert integrate(g, None, np.zeros(3)) == 0
    h = build_graph(spec([("a", 2), ("b", 1)], [("a", "b", 1)]))
    assert integrate(h, None, [1, 1]) == 3
    assert volume(g, ["a", "b", "c"]) == 3
    assert volume(build_graph(spec([("a", .5), ("b", .5)], [("a", "b", 1)])), None) == 1
    assert volume(g, []) == 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_integrate_linear_and_additive(seed):
    rng = np.random.default_rng(seed)
    g = generate_graph("grid", 4, 5, mu_rule="degree")
    u, v = rng.standard_normal((2, g.n))
    a, b = rng.standard_normal(2)
    lin = integrate(g, None, a * u + b * v)
    assert np.isclose(lin, a * integrate(g, None, u) + b * integrate(g, None, v), atol=1e-12)
    mask = rng.random(g.n) < 0.5
    A = [x for x, m in zip(g.ids, mask) if m]
    B = [x for x, m in zip(g.ids, mask) if not m]
    assert np.isclose(integrate(g, A, u) + integrate(g, B, u), integrate(g, None, u), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_boundary_interior_definition(seed):
    rng = np.random.default_rng(seed)
    g = generate_graph("gnp", 15, 0.3, seed=seed)
    start = int(rng.integers(g.n))
    ball = {start} | set(g.neighbors[start])
    d = decompose_domain(g, [g.ids[i] for i in ball])
    for i in range(g.n):
        outside = [j for j in g.neighbors[i] if not d.omega_mask[j]]
        if d.interior_mask[i]:
            assert not outside
        if d.boundary_mask[i]:
            assert outside
    assert np.array_equal(d.boundary_mask | d.interior_mask, d.omega_mask)
    assert not np.any(d.boundary_mask & d.interior_mask)


def test_field_helpers(abc):
    u = abc.field({"b": 2.0})
    assert u.tolist() == [0.0, 2.0, 0.0]
    assert abc.field_dict(u) == {"a": 0.0, "b": 2.0, "c": 0.0}
    assert abc.delta("c").tolist() == [0.0, 0.0, 1.0]
