"""Heat semigroup ``exp(-tL)``, Green function and the discrete-time Markov operator.

All continuous-time quantities go through one symmetric eigendecomposition
of ``S = M^{1/2} L M^{-1/2}`` per (graph, measure) pair, memoized.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .graph import Graph, Measure, _component_indices, check_measure, normalizing_measure
from .operators import formal_laplacian_matrix, symmetrized_laplacian

MAX_TIME = 1e6


@lru_cache(maxsize=64)
def _spectrum(graph: Graph, m: Measure):
    S = symmetrized_laplacian(graph, m)
    evals, evecs = np.linalg.eigh(S)
    root = np.sqrt(m.array)
    for a in (evals, evecs, root):
        a.flags.writeable = False
    return evals, evecs, root


def spectrum(graph: Graph, m: Measure) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues of ``L`` and the eigenvectors of its symmetrized form."""
    check_measure(graph, m)
    evals, evecs, _ = _spectrum(graph, m)
    return evals, evecs


def _clamp_time(t: float) -> float:
    t = float(t)
    if not t >= 0:
        raise ValidationError(f"time must be nonnegative, got {t}")
    if t > MAX_TIME:
        warnings.warn(f"time {t} clamped to {MAX_TIME}", RuntimeWarning, stacklevel=3)
        t = MAX_TIME
    return t


def heat_apply(graph: Graph, m: Measure, t: float, f) -> np.ndarray:
    """``exp(-tL) f``."""
    return heat_trajectory(graph, m, f, [t])[0]


def heat_trajectory(graph: Graph, m: Measure, u0, times: Sequence[float]) -> list[np.ndarray]:
    """``[exp(-tL) u0 for t in times]`` from a single eigendecomposition."""
    check_measure(graph, m)
    u0 = graph.function(u0)
    times = [_clamp_time(t) for t in times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValidationError("times must be ascending")
    if len(graph) == 0:
        return [u0.copy() for _ in times]
    evals, evecs, root = _spectrum(graph, m)
    coeffs = evecs.T @ (root * u0)
    out = []
    for t in times:
        if t == 0:
            out.append(u0.copy())
        else:
            out.append((evecs @ (np.exp(-t * evals) * coeffs)) / root)
    return out


def semigroup_matrix(graph: Graph, m: Measure, t: float) -> np.ndarray:
    """Dense matrix of ``exp(-tL)``; column ``x`` is ``exp(-tL) 1_x``."""
    check_measure(graph, m)
    t = _clamp_time(t)
    if t == 0:
        return np.eye(len(graph))
    evals, evecs, root = _spectrum(graph, m)
    E = (evecs * np.exp(-t * evals)) @ evecs.T
    return E * (root[None, :] / root[:, None])


def heat_kernel_matrix(graph: Graph, m: Measure, t: float) -> np.ndarray:
    """``K[x, y] = (exp(-tL) 1_x)(y)``.

    ``K[x, y] / m(x)`` is symmetric in ``x, y``.
    """
    return semigroup_matrix(graph, m, t).T


def heat_kernel(graph: Graph, m: Measure, t: float, x: str, y: str) -> float:
    i, j = graph.position(x), graph.position(y)
    if _clamp_time(t) == 0:
        return 1.0 if i == j else 0.0
    return float(heat_apply(graph, m, t, graph.indicator(x))[j])


def green_function(graph: Graph, m: Measure, x: str, y: str) -> float:
    """``int_0^inf (exp(-tL) 1_x)(y) dt``.

    Returns ``math.inf`` when ``x`` and ``y`` share a component without
    killing (the integral diverges there) and 0 across components.
    """
    mass = check_measure(graph, m)
    i, j = graph.position(x), graph.position(y)
    for block in _component_indices(graph):
        if i in block:
            break
    if j not in block:
        return 0.0
    if not np.any(graph.killing_array[block] > 0):
        return math.inf
    Lf = formal_laplacian_matrix(graph)[np.ix_(block, block)]
    rhs = np.zeros(len(block))
    rhs[block.index(i)] = mass[i]
    u = np.linalg.solve(Lf, rhs)
    return float(u[block.index(j)])


def markov_operator(graph: Graph) -> np.ndarray:
    """Transition matrix ``P(x, y) = b(x, y) / n(x)`` for the normalizing measure ``n``."""
    n = normalizing_measure(graph).array
    return graph.weight_matrix() / n[:, None]


def markov_apply(P: np.ndarray, f) -> np.ndarray:
    return np.asarray(P) @ np.asarray(f, dtype=float)
