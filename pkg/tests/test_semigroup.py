import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import connected_graphs
from graphdiffusion import generators as gen
from graphdiffusion.errors import IsolatedUnkilledVertex, ValidationError
from graphdiffusion.graph import make_measure, normalizing_measure, uniform_measure, \
    validate_graph
from graphdiffusion.operators import laplacian_matrix, quadratic_form, symmetrized_laplacian
from graphdiffusion.semigroup import (
    green_function,
    heat_apply,
    heat_kernel,
    heat_kernel_matrix,
    heat_trajectory,
    markov_apply,
    markov_operator,
    semigroup_matrix,
)


@pytest.fixture
def two():
    g = validate_graph(["1", "2"], [("1", "2", 1.0)])
    return g, uniform_measure(g)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_two_vertex_closed_form(two, t):
    g, m = two
    e = math.exp(-2 * t)
    u = heat_apply(g, m, t, g.indicator("1"))
    assert abs(u[0] - (1 + e) / 2) <= 1e-15
    assert abs(u[1] - (1 - e) / 2) <= 1e-15


def test_example_value_at_one(two):
    g, m = two
    assert heat_apply(g, m, 1.0, [1.0, 0.0])[0] == pytest.approx(0.56766764161830, abs=1e-13)


def test_time_zero_and_trajectory_zero(two):
    g, m = two
    f = np.array([0.3, -2.0])
    assert np.array_equal(heat_apply(g, m, 0.0, f), f)
    assert np.array_equal(heat_trajectory(g, m, f, [0])[0], f)
    assert heat_kernel(g, m, 0.0, "1", "2") == 0.0
    assert heat_kernel(g, m, 0.0, "1", "1") == 1.0


def test_time_validation(two):
    g, m = two
    with pytest.raises(ValidationError):
        heat_apply(g, m, -1.0, [1, 0])
    with pytest.raises(ValidationError):
        heat_trajectory(g, m, [1, 0], [1.0, 0.5])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        u = heat_apply(g, m, 1e7, [1, 0])
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    np.testing.assert_allclose(u, [0.5, 0.5], atol=1e-12)


@given(connected_graphs(max_vertices=15), st.floats(0.01, 5.0))
def test_matches_scipy_expm(sample, t):
    g, m, rng = sample
    P = expm(-t * laplacian_matrix(g, m))
    np.testing.assert_allclose(semigroup_matrix(g, m, t), P, atol=1e-12)
    f = rng.standard_normal(len(g))
    np.testing.assert_allclose(heat_apply(g, m, t, f), P @ f, atol=1e-11)


@given(connected_graphs(max_vertices=15), st.floats(0, 5), st.floats(0, 5))
def test_semigroup_law(sample, s, t):
    g, m, rng = sample
    f = rng.standard_normal(len(g))
    lhs = heat_apply(g, m, s + t, f)
    rhs = heat_apply(g, m, t, heat_apply(g, m, s, f))
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * max(1.0, np.max(np.abs(f)))


@given(connected_graphs(max_vertices=15), st.floats(0, 50))
def test_sub_markov(sample, t):
    g, m, rng = sample
    f = rng.uniform(0, 1, size=len(g))
    u = heat_apply(g, m, t, f)
    assert np.all(u >= -1e-12) and np.all(u <= 1 + 1e-12)


@given(connected_graphs(max_vertices=12), st.floats(0.05, 3.0))
def test_kernel_symmetry_and_positivity(sample, t):
    g, m, _ = sample
    K = heat_kernel_matrix(g, m, t)
    mass = m.array
    # m(y) k(x, y) = m(x) k(y, x)
    A = mass[None, :] * K
    np.testing.assert_allclose(A, A.T, atol=1e-13 * max(1.0, np.abs(A).max()))
    assert np.all(K > 0)


def test_triangle_kernel_positive(triangle):
    m = uniform_measure(triangle)
    assert np.all(heat_kernel_matrix(triangle, m, 1.0) > 0)
    assert heat_kernel(triangle, m, 1.0, "a", "b") == pytest.approx(
        heat_kernel_matrix(triangle, m, 1.0)[0, 1], rel=1e-14)


@given(connected_graphs(max_vertices=12, killing=False))
def test_long_time_limit_is_weighted_mean(sample):
    g, m, rng = sample
    f = rng.standard_normal(len(g))
    mean = float(f @ m.array / m.array.sum())
    gap = np.linalg.eigvalsh(symmetrized_laplacian(g, m))[1]
    t = min(40.0 / gap, 1e6)
    np.testing.assert_allclose(heat_apply(g, m, t, f), mean, atol=1e-10)


@given(connected_graphs(max_vertices=12))
def test_trajectory_mass(sample):
    g, m, rng = sample
    u0 = rng.uniform(0, 1, size=len(g))
    times = [0.0, 0.1, 0.5, 1.0, 3.0]
    mass = [float(u @ m.array) for u in heat_trajectory(g, m, u0, times)]
    if np.any(g.killing_array > 0):
        assert all(b <= a + 1e-12 for a, b in zip(mass, mass[1:]))
    else:
        np.testing.assert_allclose(mass, mass[0], rtol=1e-12)


@given(connected_graphs(max_vertices=10), st.integers(0, 2 ** 31))
def test_heat_equation_by_finite_difference(sample, seed):
    g, m, _ = sample
    f = np.random.default_rng(seed).standard_normal(len(g))
    t, dt = 0.7, 1e-5
    deriv = (heat_apply(g, m, t + dt, f) - heat_apply(g, m, t - dt, f)) / (2 * dt)
    rhs = -laplacian_matrix(g, m) @ heat_apply(g, m, t, f)
    np.testing.assert_allclose(deriv, rhs, atol=1e-5 * max(1.0, np.abs(rhs).max()))


@given(connected_graphs(max_vertices=10), st.integers(0, 2 ** 31))
def test_form_recovered_at_small_time(sample, seed):
    g, m, _ = sample
    f = np.random.default_rng(seed).standard_normal(len(g))
    t = 1e-6
    approx = float((f - heat_apply(g, m, t, f)) @ (f * m.array)) / t
    assert approx == pytest.approx(quadratic_form(g, f), rel=1e-4)


def test_green_examples():
    g = validate_graph(["1", "2"], [("1", "2", 1.0)], {"1": 1.0, "2": 1.0})
    assert green_function(g, uniform_measure(g), "1", "1") == pytest.approx(2 / 3, rel=1e-15)
    tri = gen.triangle()
    assert green_function(tri, uniform_measure(tri), "a", "b") == math.inf
    single = validate_graph(["x"], [], {"x": 1.0})
    assert green_function(single, uniform_measure(single), "x", "x") == 1.0


def test_green_across_components():
    g = validate_graph(["a", "b", "c"], [("a", "b", 1.0)], {"a": 1.0, "c": 1.0})
    assert green_function(g, uniform_measure(g), "a", "c") == 0.0


@given(connected_graphs(max_vertices=8, killing=True))
def test_green_matches_time_integral(sample):
    g, m, _ = sample
    # integral of (exp(-tL) 1_x)(y) dt = (L^{-1} 1_x)(y), an independent linear solve
    G = np.linalg.inv(laplacian_matrix(g, m))
    for x in g.vertices[:3]:
        for y in g.vertices[:3]:
            i, j = g.position(x), g.position(y)
            assert green_function(g, m, x, y) == pytest.approx(G[j, i], rel=1e-9)


def test_markov_examples(triangle):
    g = validate_graph(["1", "2"], [("1", "2", 1.0)])
    assert markov_operator(g).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    P = markov_operator(triangle)
    assert P.tolist() == [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]
    assert markov_apply(P, np.ones(3)).tolist() == [1.0, 1.0, 1.0]
    with pytest.raises(IsolatedUnkilledVertex):
        markov_operator(validate_graph(["a", "b", "c"], [("a", "b", 1.0)]))


@given(connected_graphs(max_vertices=15))
def test_markov_properties(sample):
    g, _, rng = sample
    n = normalizing_measure(g)
    P = markov_operator(g)
    rows = P.sum(axis=1)
    if np.any(g.killing_array > 0):
        assert np.all(rows <= 1 + 1e-15)
    else:
        np.testing.assert_allclose(rows, 1.0, rtol=0, atol=1e-15)
    f, h = rng.standard_normal((2, len(g)))
    lhs = float((P @ f) @ (h * n.array))
    rhs = float(f @ ((P @ h) * n.array))
    assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(lhs))
    assert np.max(np.abs(np.linalg.eigvals(P))) <= 1 + 1e-12
    # over the normalizing measure the degree is one, so L = I - P
    np.testing.assert_allclose(laplacian_matrix(g, n), np.eye(len(g)) - P, rtol=0, atol=1e-14)


def test_kernel_uses_cached_spectrum(two):
    g, m = two
    a = heat_kernel_matrix(g, m, 1.0)
    b = heat_kernel_matrix(g, make_measure(g, [1.0, 1.0]), 1.0)
    assert np.array_equal(a, b)
