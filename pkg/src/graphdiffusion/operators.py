"""Formal Laplacian, the measure-normalized Laplacian and the energy form."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeLimit
from .graph import Graph, Measure, check_measure, degrees

# sign and zero tests on the formal Laplacian
SIGN_TOL = 1e-12
# dense spectral work refuses beyond this many vertices
MAX_DENSE = 2000


def formal_laplacian(graph: Graph, f) -> np.ndarray:
    """Pointwise ``sum_y b(x, y)(f(x) - f(y)) + c(x) f(x)``."""
    f = graph.function(f)
    i, j, w = graph.edge_arrays
    n = len(graph)
    flow = w * (f[i] - f[j])
    return np.bincount(i, flow, minlength=n) - np.bincount(j, flow, minlength=n) \
        + graph.killing_array * f


def formal_laplacian_matrix(graph: Graph) -> np.ndarray:
    """Matrix of the formal Laplacian (no measure)."""
    B = graph.weight_matrix()
    return np.diag(graph.weighted_degree + graph.killing_array) - B


def laplacian_matrix(graph: Graph, m: Measure) -> np.ndarray:
    """Dense matrix of ``L = (1/m) * formal Laplacian`` over the vertex order.

    ``L`` is self-adjoint in the m-weighted inner product, so ``diag(m) @ L``
    is symmetric.
    """
    mass = check_measure(graph, m)
    _check_size(graph)
    return formal_laplacian_matrix(graph) / mass[:, None]


def symmetrized_laplacian(graph: Graph, m: Measure) -> np.ndarray:
    """``M^{1/2} L M^{-1/2}``, assembled entrywise so it is exactly symmetric."""
    mass = check_measure(graph, m)
    _check_size(graph)
    root = np.sqrt(mass)
    S = -graph.weight_matrix() / np.outer(root, root)
    S[np.diag_indices_from(S)] = degrees(graph, m)
    return S


def _check_size(graph: Graph):
    if len(graph) > MAX_DENSE:
        raise SizeLimit(f"{len(graph)} vertices exceeds the dense limit of {MAX_DENSE}")


def quadratic_form(graph: Graph, f, g=None) -> float:
    """The polarized energy form.

    ``Q(f, g) = 1/2 sum_{x,y} b(x,y)(f(x)-f(y))(g(x)-g(y)) + sum_x c(x) f(x) g(x)``;
    with ``g`` omitted this is ``Q(f) = Q(f, f)``.
    """
    f = graph.function(f)
    g = f if g is None else graph.function(g)
    i, j, w = graph.edge_arrays
    # each unordered edge appears once, which absorbs the factor 1/2
    return float(np.sum(w * (f[i] - f[j]) * (g[i] - g[j]))
                 + np.sum(graph.killing_array * f * g))


def greens_formula_residual(graph: Graph, f, v) -> float:
    """How far the two Green's formula pairings are from ``Q(f, v)``."""
    f = graph.function(f)
    v = graph.function(v)
    q = quadratic_form(graph, f, v)
    return abs(q - float(f @ formal_laplacian(graph, v))) \
        + abs(q - float(formal_laplacian(graph, f) @ v))


def is_superharmonic(graph: Graph, f, tol: float = SIGN_TOL) -> bool:
    return bool(np.all(formal_laplacian(graph, f) >= -tol))


def is_harmonic(graph: Graph, f, tol: float = SIGN_TOL) -> bool:
    return bool(np.all(np.abs(formal_laplacian(graph, f)) <= tol))


@dataclass(frozen=True)
class NormBound:
    sup_degree: float
    operator_norm: float

    @property
    def holds(self) -> bool:
        return self.operator_norm <= 2.0 * self.sup_degree * (1 + 1e-12) + 1e-12


def norm_bound_report(graph: Graph, m: Measure) -> NormBound:
    """Largest generalized degree and the norm of ``L`` on the m-weighted space.

    The norm never exceeds twice the largest degree.
    """
    if len(graph) == 0:
        return NormBound(0.0, 0.0)
    deg = degrees(graph, m)
    evals = np.linalg.eigvalsh(symmetrized_laplacian(graph, m))
    return NormBound(float(deg.max()), float(np.max(np.abs(evals))))
