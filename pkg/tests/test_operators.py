import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import connected_graphs
from graphdiffusion import generators as gen
from graphdiffusion.errors import SizeLimit
from graphdiffusion.graph import make_measure, normalizing_measure, uniform_measure, \
    validate_graph
from graphdiffusion.operators import (
    formal_laplacian,
    formal_laplacian_matrix,
    greens_formula_residual,
    is_harmonic,
    is_superharmonic,
    laplacian_matrix,
    norm_bound_report,
    quadratic_form,
    symmetrized_laplacian,
)


def laplacian_by_loops(g, f):
    """Formal Laplacian evaluated straight from the defining double sum."""
    out = []
    for x in g.vertices:
        s = sum(g.weight(x, y) * (f[g.position(x)] - f[g.position(y)]) for y in g.vertices)
        out.append(s + g.killing[g.position(x)] * f[g.position(x)])
    return np.array(out)


def energy_by_loops(g, f, h):
    """Polarized energy from the ordered-pair double sum with its factor 1/2."""
    s = 0.0
    for x in g.vertices:
        for y in g.vertices:
            i, j = g.position(x), g.position(y)
            s += 0.5 * g.weight(x, y) * (f[i] - f[j]) * (h[i] - h[j])
    return s + sum(c * a * b for c, a, b in zip(g.killing, f, h))


def test_formal_laplacian_examples(killed_pair):
    two = validate_graph(["1", "2"], [("1", "2", 1.0)])
    assert formal_laplacian(two, [1.0, 0.0]).tolist() == [1.0, -1.0]
    assert formal_laplacian(two, [3.0, 3.0]).tolist() == [0.0, 0.0]
    g, _ = killed_pair
    assert formal_laplacian(g, [1.0, 1.0]).tolist() == [1.0, 0.0]


@given(connected_graphs(max_vertices=10), st.integers(0, 2 ** 31))
def test_formal_laplacian_matches_loops(sample, seed):
    g, _, _ = sample
    f = np.random.default_rng(seed).standard_normal(len(g))
    np.testing.assert_allclose(formal_laplacian(g, f), laplacian_by_loops(g, f),
                               rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(formal_laplacian_matrix(g) @ f, formal_laplacian(g, f),
                               rtol=1e-12, atol=1e-12)


def test_laplacian_matrix_examples():
    two = validate_graph(["1", "2"], [("1", "2", 1.0)])
    assert laplacian_matrix(two, uniform_measure(two)).tolist() == [[1, -1], [-1, 1]]
    assert laplacian_matrix(two, uniform_measure(two, 2.0)).tolist() == \
        [[0.5, -0.5], [-0.5, 0.5]]
    killed = validate_graph(["1", "2"], [("1", "2", 1.0)], {"1": 1.0})
    assert laplacian_matrix(killed, uniform_measure(killed)).tolist() == [[2, -1], [-1, 1]]


@given(connected_graphs(max_vertices=30))
def test_laplacian_structure(sample):
    g, m, _ = sample
    L = laplacian_matrix(g, m)
    ML = m.array[:, None] * L
    assert np.max(np.abs(ML - ML.T)) <= 1e-14 * np.max(np.abs(ML))
    np.testing.assert_allclose(ML.sum(axis=1), g.killing_array, atol=1e-12)
    assert np.linalg.eigvalsh(symmetrized_laplacian(g, m)).min() >= -1e-12


@given(connected_graphs(max_vertices=15, killing=False))
def test_kernel_is_constants_without_killing(sample):
    g, m, _ = sample
    evals = np.linalg.eigvalsh(symmetrized_laplacian(g, m))
    assert np.sum(np.abs(evals) <= 1e-10 * max(1.0, evals.max())) == 1


def test_quadratic_form_on_indicators(killed_pair):
    g = gen.random_connected(np.random.default_rng(3), 7, killing=True)
    for x in g.vertices:
        for y in g.vertices:
            q = quadratic_form(g, g.indicator(x), g.indicator(y))
            if x == y:
                expect = g.weighted_degree[g.position(x)] + g.killing[g.position(x)]
            else:
                expect = -g.weight(x, y)
            assert q == pytest.approx(expect, abs=1e-14)
    tri = gen.triangle()
    assert quadratic_form(tri, np.full(3, 4.0)) == 0.0


@given(connected_graphs(max_vertices=10), st.integers(0, 2 ** 31))
def test_quadratic_form_matches_double_sum(sample, seed):
    g, _, _ = sample
    f, h = np.random.default_rng(seed).standard_normal((2, len(g)))
    assert quadratic_form(g, f, h) == pytest.approx(energy_by_loops(g, f, h), rel=1e-11,
                                                    abs=1e-11)


@given(connected_graphs(max_vertices=20), st.integers(0, 2 ** 31))
def test_greens_formula(sample, seed):
    g, _, _ = sample
    f, v = np.random.default_rng(seed).standard_normal((2, len(g)))
    q = quadratic_form(g, f, v)
    assert greens_formula_residual(g, f, v) <= 1e-12 * (1 + abs(q))


def test_greens_formula_trivial_cases(triangle):
    e = triangle.indicator("a")
    assert greens_formula_residual(triangle, e, e) == 0.0
    const = np.full(3, 2.0)
    assert formal_laplacian(triangle, const).tolist() == [0.0, 0.0, 0.0]
    assert greens_formula_residual(triangle, const, np.arange(3.0)) == 0.0


@given(connected_graphs(max_vertices=12, killing=False), st.integers(0, 2 ** 31))
def test_energy_zero_iff_constant(sample, seed):
    g, _, _ = sample
    f = np.random.default_rng(seed).standard_normal(len(g))
    assert quadratic_form(g, f) > 0
    assert abs(quadratic_form(g, np.full(len(g), f[0]))) <= 1e-12


@given(connected_graphs(max_vertices=15), st.integers(0, 2 ** 31))
def test_energy_decreases_under_unit_contraction(sample, seed):
    g, _, _ = sample
    f = 2 * np.random.default_rng(seed).standard_normal(len(g))
    assert quadratic_form(g, np.clip(f, 0, 1)) <= quadratic_form(g, f) + 1e-12


def test_superharmonic_examples(killed_pair, triangle):
    g, _ = killed_pair
    h = [1.0, 2.0]
    assert formal_laplacian(g, h).tolist() == [0.0, 1.0]
    assert is_superharmonic(g, h) and not is_harmonic(g, h)
    assert is_harmonic(triangle, np.ones(3))
    assert formal_laplacian(triangle, triangle.indicator("a"))[1] == -1.0
    assert not is_superharmonic(triangle, triangle.indicator("a"))


def test_norm_bound_examples():
    two = validate_graph(["1", "2"], [("1", "2", 1.0)])
    rep = norm_bound_report(two, uniform_measure(two))
    assert rep.sup_degree == 1.0 and rep.operator_norm == pytest.approx(2.0, rel=1e-15)
    assert rep.holds
    single = validate_graph(["x"], [])
    rep = norm_bound_report(single, uniform_measure(single))
    assert (rep.sup_degree, rep.operator_norm) == (0.0, 0.0)


@given(connected_graphs(max_vertices=25))
def test_norm_bound_holds(sample):
    g, m, _ = sample
    assert norm_bound_report(g, m).holds
    rep = norm_bound_report(g, normalizing_measure(g))
    assert rep.sup_degree == 1.0 and rep.operator_norm <= 2.0 + 1e-12


def test_size_limit():
    big = gen.path(0, 2000)
    with pytest.raises(SizeLimit):
        laplacian_matrix(big, make_measure(big, np.ones(len(big))))
