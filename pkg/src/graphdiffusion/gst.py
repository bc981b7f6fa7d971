"""Generalized ground state transforms.

Given a strictly positive superharmonic ``h``, a bijection ``tau`` of the
vertices and ``beta > 0``, the transformed graph over ``(X, m_h)`` is

    m_h(tau w)        = beta h(w)^2 m(w)
    b_h(tau x, tau y) = beta h(x) h(y) b(x, y)
    c_h(tau z)        = beta h(z) (formal Laplacian of h)(z)

and ``f -> h * (f o tau)`` intertwines its Laplacian with the original one.
A non-constant ``h`` therefore yields a second, genuinely different graph
with the same diffusion up to order isomorphism.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from .errors import LpInfeasible, NotBijective, NotConnected, NotPositive, NotSuperharmonic
from .graph import Graph, Measure, _component_indices, check_measure, is_connected, \
    make_measure, validate_graph
from .operators import SIGN_TOL, formal_laplacian, formal_laplacian_matrix, is_superharmonic
from .orderiso import (
    IntertwinerCertificate,
    OrderIso,
    _rel,
    verify_structure_equations,
)

# h(v1) must beat h(v0) = 1 by this much to count as non-constant
NONCONSTANT_THRESHOLD = 1e-6
H_FLOOR = 1e-6
H_CAP = 1e6
DISTINCT_THRESHOLD = 0.05


@dataclass(frozen=True)
class GstSpec:
    """Data of a transform: scaling ``h`` (vertex-aligned), bijection ``tau``, factor ``beta``.

    ``tau=None`` means the identity.
    """

    h: tuple[float, ...]
    tau: Mapping[str, str] | None = None
    beta: float = 1.0

    def tau_for(self, graph: Graph) -> dict[str, str]:
        if self.tau is None:
            return {v: v for v in graph.vertices}
        tau = {str(k): str(v) for k, v in self.tau.items()}
        if set(tau) != set(graph.vertices) or set(tau.values()) != set(graph.vertices):
            raise NotBijective("tau must be a bijection of the graph's vertices")
        return tau


def _checked(graph: Graph, m: Measure, spec: GstSpec):
    check_measure(graph, m)
    h = graph.function(spec.h)
    if not np.all(h > 0) or not np.all(np.isfinite(h)):
        raise NotPositive("h must be finite and strictly positive")
    if not spec.beta > 0 or not math.isfinite(spec.beta):
        raise NotPositive(f"beta must be positive, got {spec.beta}")
    Lh = formal_laplacian(graph, h)
    if np.any(Lh < -SIGN_TOL):
        worst = graph.vertices[int(np.argmin(Lh))]
        raise NotSuperharmonic(f"formal Laplacian of h is {Lh.min():.3g} at {worst!r}")
    return h, Lh, spec.tau_for(graph)


def ground_state_transform(graph: Graph, m: Measure, spec: GstSpec) -> tuple[Graph, Measure]:
    """The transformed graph ``(b_h, c_h)`` and measure ``m_h``."""
    h, Lh, tau = _checked(graph, m, spec)
    beta = float(spec.beta)
    hv = dict(zip(graph.vertices, h))
    edges = [(tau[u], tau[v], beta * hv[u] * hv[v] * w) for u, v, w in graph.edges]
    # tolerated rounding below zero is clipped so the killing term stays valid
    killing = {tau[z]: beta * hz * max(lz, 0.0) for z, hz, lz in zip(graph.vertices, h, Lh)}
    new = validate_graph(graph.vertices, edges, killing)
    mass = {tau[w]: beta * hw ** 2 * mw for w, hw, mw in zip(graph.vertices, h, m.array)}
    return new, make_measure(new, mass)


def gst_intertwiner(graph: Graph, m: Measure, spec: GstSpec,
                    seed: int = 0) -> tuple[OrderIso, IntertwinerCertificate]:
    """The canonical map from the transformed space to the original one, certified.

    The map sends ``f`` on the transformed graph to ``h * (f o tau)``.
    """
    new, m_h = ground_state_transform(graph, m, spec)
    tau = spec.tau_for(graph)
    iso = OrderIso(new.vertices, graph.vertices,
                   tuple(tau[w] for w in graph.vertices),
                   tuple(float(v) for v in graph.function(spec.h)))
    cert = verify_structure_equations(new, m_h, graph, m, iso, float(spec.beta), seed=seed)
    return iso, cert


def _polish(graph: Graph, h: np.ndarray) -> np.ndarray:
    """Re-solve ``L h = max(L h, 0)`` per component so the LP's rounding cannot
    leave ``L h`` visibly negative. Unkilled components only admit constants."""
    L = formal_laplacian_matrix(graph)
    g = np.maximum(L @ h, 0.0)
    out = h.copy()
    for block in _component_indices(graph):
        if np.any(graph.killing_array[block] > 0):
            out[block] = np.linalg.solve(L[np.ix_(block, block)], g[block])
        else:
            out[block] = h[block].mean()
    return out


def _lp_candidate(graph: Graph, L: np.ndarray, v0: int, v1: int) -> np.ndarray | None:
    n = len(graph)
    objective = np.zeros(n)
    objective[v1] = -1.0
    pin = np.zeros((1, n))
    pin[0, v0] = 1.0
    res = linprog(objective, A_ub=-L, b_ub=np.zeros(n), A_eq=pin, b_eq=[1.0],
                  bounds=[(H_FLOOR, H_CAP)] * n, method="highs")
    if res.status == 2:
        raise LpInfeasible("superharmonic cone LP infeasible; constants should always be feasible")
    if res.status != 0:
        return None
    if res.x[v1] <= 1.0 + NONCONSTANT_THRESHOLD:
        return None
    for cand in (_polish(graph, res.x), res.x):
        cand = cand / cand[v0]
        if np.all(cand > 0) and is_superharmonic(graph, cand) \
                and cand[v1] > 1.0 + NONCONSTANT_THRESHOLD:
            return cand
    return None


def find_positive_superharmonic(graph: Graph, require_nonconstant: bool = False) -> np.ndarray | None:
    """A strictly positive superharmonic function, or None.

    Runs, over ordered vertex pairs ``(v0, v1)``, the linear program
    maximize ``h(v1)`` subject to ``L h >= 0``, ``h(v0) = 1``,
    ``1e-6 <= h <= 1e6`` and returns the first solution that is
    non-constant. Without ``require_nonconstant`` an unkilled graph just
    gets the constant 1.
    """
    if len(graph) == 0:
        return None
    unkilled = not np.any(graph.killing_array > 0)
    if not require_nonconstant and unkilled:
        return np.ones(len(graph))
    L = formal_laplacian_matrix(graph)
    for v0, v1 in itertools.permutations(range(len(graph)), 2):
        cand = _lp_candidate(graph, L, v0, v1)
        if cand is not None:
            return cand
    return None if require_nonconstant else np.ones(len(graph))


@dataclass(frozen=True)
class Counterexample:
    graph: Graph
    measure: Measure
    iso: OrderIso
    certificate: IntertwinerCertificate
    h: tuple[float, ...]
    differences: dict[str, float]

    @property
    def distinct(self) -> bool:
        return max(self.differences.values()) >= DISTINCT_THRESHOLD


def _relative_differences(g1: Graph, m1: Measure, g2: Graph, m2: Measure) -> dict[str, float]:
    def worst(a, b):
        r = _rel(a, b)
        return float(r.max()) if r.size else 0.0

    return {
        "b": worst(g1.weight_matrix(), g2.weight_matrix()),
        "c": worst(g1.killing_array, g2.killing_array),
        "m": worst(m1.array, m2.array),
    }


def counterexample_pair(graph: Graph, m: Measure, seed: int = 0) -> Counterexample | None:
    """Two different graphs whose diffusions are order isomorphic, or None.

    None means the graph is recurrent: only constant positive superharmonic
    functions exist and no such pair can be built this way.
    """
    if not is_connected(graph):
        raise NotConnected("counterexample_pair needs a connected graph")
    h = find_positive_superharmonic(graph, require_nonconstant=True)
    if h is None:
        return None
    spec = GstSpec(tuple(float(v) for v in h), None, 1.0)
    new, m_h = ground_state_transform(graph, m, spec)
    iso, cert = gst_intertwiner(graph, m, spec, seed=seed)
    return Counterexample(new, m_h, iso, cert, spec.h,
                          _relative_differences(graph, m, new, m_h))
