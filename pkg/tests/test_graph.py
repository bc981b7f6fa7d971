import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import connected_graphs
from graphdiffusion import generators as gen
from graphdiffusion.errors import (
    AsymmetricInput,
    IsolatedUnkilledVertex,
    NegativeKilling,
    NegativeWeight,
    NonPositiveMeasure,
    SelfLoop,
    UnknownVertex,
    ValidationError,
)
from graphdiffusion.graph import (
    combinatorial_distance,
    combinatorial_distances,
    connected_components,
    degrees,
    generalized_degree,
    gradient_norm,
    graph_from_matrix,
    huang_distances,
    huang_metric,
    in_A,
    is_connected,
    is_intrinsic,
    make_measure,
    normalizing_measure,
    total_edge_weight,
    uniform_measure,
    validate_graph,
)


def floyd_warshall(W):
    """All-pairs shortest paths on a dense length matrix (inf = no edge)."""
    n = len(W)
    D = np.array(W, dtype=float)
    np.fill_diagonal(D, 0.0)
    for k in range(n):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


def hop_lengths(g):
    B = g.weight_matrix()
    return np.where(B > 0, 1.0, math.inf)


def huang_lengths_oracle(g, m):
    """Edge lengths written out from the definition, vertex by vertex."""
    n = len(g)
    W = np.full((n, n), math.inf)
    for u, v, _ in g.edges:
        du = (sum(g.weight(u, z) for z in g.vertices if z != u)
              + g.killing[g.position(u)]) / m[u]
        dv = (sum(g.weight(v, z) for z in g.vertices if z != v)
              + g.killing[g.position(v)]) / m[v]
        i, j = g.position(u), g.position(v)
        W[i, j] = W[j, i] = min(du ** -0.5, dv ** -0.5)
    return W


# --- validation -------------------------------------------------------------

def test_triangle_is_valid(triangle):
    assert triangle.vertices == ("a", "b", "c")
    B = triangle.weight_matrix()
    assert np.array_equal(B, B.T) and np.all(np.diag(B) == 0)
    assert triangle.killing == (0.0, 0.0, 0.0)


@pytest.mark.parametrize("edges, killing, error", [
    ([("a", "a", 1.0)], None, SelfLoop),
    ([("a", "b", 1.0), ("b", "a", 2.0)], None, AsymmetricInput),
    ([("a", "b", -1.0)], None, NegativeWeight),
    ([("a", "z", 1.0)], None, UnknownVertex),
    ([("a", "b", 1.0)], {"a": -0.5}, NegativeKilling),
    ([("a", "b", 1.0)], {"q": 0.5}, UnknownVertex),
    ([("a", "b", math.nan)], None, ValidationError),
])
def test_validation_errors(edges, killing, error):
    with pytest.raises(error):
        validate_graph(["a", "b", "c"], edges, killing)


def test_duplicate_vertex_ids_rejected():
    with pytest.raises(ValidationError):
        validate_graph(["a", "a"], [])


def test_symmetric_duplicate_listing_accepted():
    g = validate_graph(["a", "b"], [("a", "b", 2.0), ("b", "a", 2.0)])
    assert g.edges == (("a", "b", 2.0),)


def test_zero_weights_dropped():
    g = validate_graph(["a", "b"], [("a", "b", 0.0), ("a", "a", 0.0)])
    assert g.edges == () and not is_connected(g)


def test_unknown_vertex_lookup():
    g = gen.triangle()
    with pytest.raises(UnknownVertex):
        g.position("zz")
    with pytest.raises(KeyError):
        combinatorial_distance(g, "a", "zz")


def test_graph_from_matrix_round_trip():
    B = np.array([[0, 1, 0], [1, 0, 2.5], [0, 2.5, 0]])
    g = graph_from_matrix(["x", "y", "z"], B, [0, 0, 1])
    assert np.array_equal(g.weight_matrix(), B)
    assert g.killing == (0.0, 0.0, 1.0)
    with pytest.raises(AsymmetricInput):
        graph_from_matrix(["x", "y"], np.array([[0, 1], [2, 0]]))


def test_measure_validation(triangle):
    with pytest.raises(NonPositiveMeasure):
        make_measure(triangle, [1.0, 0.0, 1.0])
    with pytest.raises(ValidationError):
        make_measure(triangle, {"a": 1.0, "b": 1.0})
    m = make_measure(triangle, {"a": 1.0, "b": 2.0, "c": 3.0})
    assert m["b"] == 2.0


# --- components and combinatorial metric -------------------------------------

def test_components():
    assert connected_components(gen.path(-1, 1)) == [("-1", "0", "1")]
    two = validate_graph(["a", "b", "c", "d"], [("a", "b", 1), ("c", "d", 1)])
    assert connected_components(two) == [("a", "b"), ("c", "d")]
    iso = validate_graph(["a", "b", "c"], [("a", "b", 1)])
    assert connected_components(iso) == [("a", "b"), ("c",)]


def test_combinatorial_examples():
    g = gen.path(-1, 1)
    assert combinatorial_distance(g, "-1", "1") == 2
    assert combinatorial_distance(g, "0", "0") == 0
    two = validate_graph(["a", "b", "c", "d"], [("a", "b", 1), ("c", "d", 1)])
    assert combinatorial_distance(two, "a", "d") == math.inf


@given(connected_graphs(max_vertices=12))
def test_combinatorial_matches_floyd_warshall(sample):
    g, _, _ = sample
    D = combinatorial_distances(g)
    assert np.array_equal(D, floyd_warshall(hop_lengths(g)))
    # triangle inequality d(x,z) <= d(x,y) + d(y,z) over all triples
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :])
    assert np.array_equal(D == 1, g.weight_matrix() > 0)


# --- degrees, normalizing measure, total weight ------------------------------

def test_degree_examples(path3, killed_pair):
    g, m = path3
    assert generalized_degree(g, m, "0") == 2.0
    gk, mk = killed_pair
    assert generalized_degree(gk, mk, "1") == 2.0


def test_normalizing_measure_examples(triangle):
    assert normalizing_measure(triangle).values == (2.0, 2.0, 2.0)
    g = validate_graph(["1", "2"], [("1", "2", 3.0)])
    assert normalizing_measure(g).values == (3.0, 3.0)
    with pytest.raises(IsolatedUnkilledVertex):
        normalizing_measure(validate_graph(["a", "b", "c"], [("a", "b", 1.0)]))


@given(connected_graphs(max_vertices=15))
def test_normalizing_measure_gives_unit_degree(sample):
    g, _, _ = sample
    assert np.all(degrees(g, normalizing_measure(g)) == 1.0)


def test_total_edge_weight_examples(triangle):
    assert total_edge_weight(triangle) == 6.0
    assert total_edge_weight(validate_graph(["a", "b"], [])) == 0.0
    g = validate_graph(["1", "2"], [("1", "2", 1.0)], {"1": 1.0, "2": 1.0})
    assert total_edge_weight(g) == 4.0


# --- Huang metric -----------------------------------------------------------

def test_huang_examples(path3):
    g, m = path3
    assert huang_metric(g, m, "-1", "1") == pytest.approx(math.sqrt(2), rel=1e-15)
    assert huang_metric(g, m, "0", "0") == 0.0


@given(connected_graphs(max_vertices=10))
def test_huang_matches_oracle(sample):
    g, m, _ = sample
    R = huang_distances(g, m)
    np.testing.assert_allclose(R, floyd_warshall(huang_lengths_oracle(g, m)),
                               rtol=1e-12, atol=0)


@given(connected_graphs(max_vertices=15))
def test_huang_is_combinatorial_under_normalizing_measure(sample):
    g, _, _ = sample
    n = normalizing_measure(g)
    assert np.array_equal(huang_distances(g, n), combinatorial_distances(g))


def test_huang_infinite_across_components():
    g = validate_graph(["a", "b", "c", "d"], [("a", "b", 1), ("c", "d", 1)])
    assert huang_metric(g, uniform_measure(g), "a", "c") == math.inf


def test_huang_path_brute_force_on_small_graph():
    g = gen.complete(["a", "b", "c", "d"])
    g = validate_graph(g.vertices, [("a", "b", 1), ("b", "c", 4), ("c", "d", 1),
                                    ("a", "d", 0.5), ("a", "c", 2)])
    m = make_measure(g, [1.0, 2.0, 0.5, 3.0])
    deg = degrees(g, m)

    def length(p):
        return sum(min(deg[g.position(u)] ** -0.5, deg[g.position(v)] ** -0.5)
                   for u, v in zip(p, p[1:]))

    for x, y in itertools.permutations(g.vertices, 2):
        best = math.inf
        others = [v for v in g.vertices if v not in (x, y)]
        for r in range(len(others) + 1):
            for mid in itertools.permutations(others, r):
                p = (x, *mid, y)
                if all(g.weight(u, v) > 0 for u, v in zip(p, p[1:])):
                    best = min(best, length(p))
        assert huang_metric(g, m, x, y) == pytest.approx(best, rel=1e-14)


# --- intrinsic metrics and the gradient bound --------------------------------

def test_intrinsic_examples(path3):
    g, m = path3
    assert is_intrinsic(g, m, np.zeros((3, 3)))
    rep = is_intrinsic(g, m, combinatorial_distances(g))
    assert not rep and rep.worst_vertex == "0" and rep.slack == -1.0
    assert is_intrinsic(g, m, huang_distances(g, m))


@given(connected_graphs(max_vertices=20))
def test_huang_metric_is_intrinsic(sample):
    g, m, _ = sample
    assert is_intrinsic(g, m, huang_distances(g, m))


def test_remark_gradient_examples(path3):
    g, m = path3
    f_plus, f_minus = g.indicator("1"), g.indicator("-1")
    assert in_A(g, m, f_plus)
    assert in_A(g, m, f_minus)
    assert gradient_norm(g, m, f_plus + f_minus, "0") == math.sqrt(2.0)
    assert not in_A(g, m, f_plus + f_minus)
    assert gradient_norm(g, m, np.full(3, 7.0), "0") == 0.0


@given(connected_graphs(max_vertices=12), st.integers(0, 2 ** 31))
def test_in_A_stable_under_normal_contractions(sample, seed):
    g, m, _ = sample
    rng = np.random.default_rng(seed)
    f = rng.uniform(-2, 2, size=len(g))
    # shrink f until it lies in A; the zero function always does
    for _ in range(60):
        if in_A(g, m, f):
            break
        f = f / 2
    assert in_A(g, m, f)
    assert in_A(g, m, np.clip(f, 0, 1))
    assert in_A(g, m, np.abs(f))
