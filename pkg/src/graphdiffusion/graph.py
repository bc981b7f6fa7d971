"""Weighted graphs with killing term over a discrete measure space.

A graph is a triple (vertices, b, c): symmetric nonnegative edge weights
``b`` with zero diagonal and a nonnegative killing term ``c``. A measure is
a strictly positive weight per vertex. Vertex ids are strings kept in
lexicographic order; every array-valued vertex function in this package is
aligned with ``Graph.vertices``.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    AsymmetricInput,
    IsolatedUnkilledVertex,
    NegativeKilling,
    NegativeWeight,
    NonPositiveMeasure,
    SelfLoop,
    UnknownVertex,
    ValidationError,
)

# absolute slack on the inequalities defining intrinsic metrics and the set A
INEQUALITY_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Immutable weighted graph ``(b, c)``.

    ``edges`` holds each unordered pair once as ``(u, v, w)`` with ``u < v``
    and ``w > 0``; ``killing`` is aligned with ``vertices``. Build instances
    through :func:`validate_graph` rather than directly.
    """

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]
    killing: tuple[float, ...]

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    def position(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {x!r}") from None

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index arrays ``(i, j, w)`` with ``i < j``, one entry per edge."""
        idx = self.index
        i = np.array([idx[u] for u, _, _ in self.edges], dtype=np.intp)
        j = np.array([idx[v] for _, v, _ in self.edges], dtype=np.intp)
        w = np.array([w for _, _, w in self.edges], dtype=float)
        return i, j, w

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per vertex, the sorted list of ``(neighbor index, weight)``."""
        nbrs: list[list[tuple[int, float]]] = [[] for _ in self.vertices]
        for i, j, w in zip(*self.edge_arrays):
            nbrs[i].append((int(j), float(w)))
            nbrs[j].append((int(i), float(w)))
        return tuple(tuple(sorted(row)) for row in nbrs)

    @cached_property
    def weighted_degree(self) -> np.ndarray:
        """``sum_y b(x, y)`` per vertex."""
        i, j, w = self.edge_arrays
        n = len(self.vertices)
        return np.bincount(i, w, minlength=n) + np.bincount(j, w, minlength=n)

    @cached_property
    def killing_array(self) -> np.ndarray:
        return np.array(self.killing, dtype=float)

    def weight_matrix(self) -> np.ndarray:
        """Dense symmetric matrix of ``b`` over the canonical vertex order."""
        n = len(self.vertices)
        B = np.zeros((n, n))
        i, j, w = self.edge_arrays
        B[i, j] = w
        B[j, i] = w
        return B

    def weight(self, x: str, y: str) -> float:
        i, j = self.position(x), self.position(y)
        for k, w in self.adjacency[i]:
            if k == j:
                return w
        return 0.0

    def function(self, values: Mapping[str, float] | Sequence[float] | np.ndarray,
                 default: float | None = None) -> np.ndarray:
        """Coerce a mapping or sequence into a vertex-aligned array.

        With a mapping, vertices missing from it take ``default``; if no
        default is given they are an error.
        """
        n = len(self.vertices)
        if isinstance(values, Mapping):
            for key in values:
                if key not in self.index:
                    raise UnknownVertex(f"unknown vertex {key!r}")
            out = np.empty(n)
            for k, v in enumerate(self.vertices):
                if v in values:
                    out[k] = float(values[v])
                elif default is not None:
                    out[k] = default
                else:
                    raise ValidationError(f"no value given for vertex {v!r}")
            return out
        out = np.asarray(values, dtype=float)
        if out.shape != (n,):
            raise ValidationError(f"expected {n} values, got shape {out.shape}")
        return out

    def indicator(self, x: str) -> np.ndarray:
        e = np.zeros(len(self.vertices))
        e[self.position(x)] = 1.0
        return e

    def restrict(self, keep: Iterable[str]) -> Graph:
        """Induced subgraph on ``keep``; killing is carried over unchanged."""
        keep = set(keep)
        for v in keep:
            self.position(v)
        return validate_graph(
            sorted(keep),
            [(u, v, w) for u, v, w in self.edges if u in keep and v in keep],
            {v: c for v, c in zip(self.vertices, self.killing) if v in keep},
        )


@dataclass(frozen=True)
class Measure:
    """Strictly positive vertex weights aligned with a graph's vertices."""

    vertices: tuple[str, ...]
    values: tuple[float, ...]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def __getitem__(self, x: str) -> float:
        try:
            return self.values[self.vertices.index(x)]
        except ValueError:
            raise UnknownVertex(f"unknown vertex {x!r}") from None


def validate_graph(vertices: Iterable[str],
                   edges: Iterable[tuple[str, str, float]],
                   killing: Mapping[str, float] | None = None) -> Graph:
    """Check the graph axioms and return a canonical :class:`Graph`.

    Edges may be listed in either orientation and even twice, provided
    both listings carry the same weight. Zero-weight entries (including
    zero self-loops) are dropped.
    """
    ids = [str(v) for v in vertices]
    if len(set(ids)) != len(ids):
        raise ValidationError("vertex ids must be unique")
    known = set(ids)

    weights: dict[tuple[str, str], float] = {}
    for u, v, w in edges:
        u, v = str(u), str(v)
        for x in (u, v):
            if x not in known:
                raise UnknownVertex(f"edge references unknown vertex {x!r}")
        w = float(w)
        if not math.isfinite(w):
            raise ValidationError(f"edge ({u}, {v}) has non-finite weight {w}")
        if w < 0:
            raise NegativeWeight(f"edge ({u}, {v}) has negative weight {w}")
        if u == v:
            if w > 0:
                raise SelfLoop(f"self-loop at {u!r} with weight {w}")
            continue
        key = (u, v) if u < v else (v, u)
        if key in weights and weights[key] != w:
            raise AsymmetricInput(
                f"conflicting weights {weights[key]} and {w} for pair {key}")
        weights[key] = w

    killing = dict(killing or {})
    for x, cx in killing.items():
        if str(x) not in known:
            raise UnknownVertex(f"killing term for unknown vertex {x!r}")
        cx = float(cx)
        if not math.isfinite(cx):
            raise ValidationError(f"killing term at {x!r} is not finite")
        if cx < 0:
            raise NegativeKilling(f"killing term at {x!r} is negative: {cx}")

    order = tuple(sorted(ids))
    kill = {str(k): float(v) for k, v in killing.items()}
    return Graph(
        vertices=order,
        edges=tuple((u, v, w) for (u, v), w in sorted(weights.items()) if w > 0),
        killing=tuple(kill.get(v, 0.0) for v in order),
    )


def graph_from_matrix(vertices: Sequence[str], B: np.ndarray,
                      killing: Sequence[float] | None = None) -> Graph:
    """Build a graph from a dense weight matrix indexed like ``vertices``."""
    B = np.asarray(B, dtype=float)
    n = len(vertices)
    if B.shape != (n, n):
        raise ValidationError(f"weight matrix must be {n}x{n}")
    edges = [(vertices[i], vertices[j], B[i, j])
             for i in range(n) for j in range(n) if B[i, j] != 0 or i == j]
    kill = None if killing is None else dict(zip(vertices, killing))
    return validate_graph(vertices, edges, kill)


def make_measure(graph: Graph, values) -> Measure:
    """Validate ``values`` (mapping or aligned sequence) as a measure on ``graph``."""
    arr = graph.function(values)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        bad = [v for v, a in zip(graph.vertices, arr) if not (a > 0 and math.isfinite(a))]
        raise NonPositiveMeasure(f"measure must be finite and > 0; offending vertices {bad}")
    return Measure(graph.vertices, tuple(float(a) for a in arr))


def uniform_measure(graph: Graph, value: float = 1.0) -> Measure:
    return make_measure(graph, np.full(len(graph), float(value)))


def normalizing_measure(graph: Graph) -> Measure:
    """The measure ``n(x) = sum_y b(x, y) + c(x)`` making every degree one."""
    n = graph.weighted_degree + graph.killing_array
    zero = [v for v, a in zip(graph.vertices, n) if a <= 0]
    if zero:
        raise IsolatedUnkilledVertex(
            f"normalizing measure vanishes at isolated unkilled vertices {zero}")
    return Measure(graph.vertices, tuple(float(a) for a in n))


def check_measure(graph: Graph, m: Measure) -> np.ndarray:
    if m.vertices != graph.vertices:
        raise ValidationError("measure is defined on a different vertex set")
    return m.array


def total_edge_weight(graph: Graph) -> float:
    """Sum of ``b`` over ordered pairs plus the total killing."""
    return float(2.0 * sum(w for _, _, w in graph.edges) + sum(graph.killing))


def connected_components(graph: Graph) -> list[tuple[str, ...]]:
    """Vertex blocks joined by positive-weight paths, ordered by smallest id."""
    return [tuple(graph.vertices[i] for i in block)
            for block in _component_indices(graph)]


def _component_indices(graph: Graph) -> list[list[int]]:
    seen = [False] * len(graph)
    blocks = []
    for start in range(len(graph)):
        if seen[start]:
            continue
        seen[start] = True
        block, queue = [], deque([start])
        while queue:
            i = queue.popleft()
            block.append(i)
            for j, _ in graph.adjacency[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        blocks.append(sorted(block))
    return blocks


def component_labels(graph: Graph) -> np.ndarray:
    labels = np.empty(len(graph), dtype=np.intp)
    for k, block in enumerate(_component_indices(graph)):
        labels[block] = k
    return labels


def is_connected(graph: Graph) -> bool:
    return len(graph) > 0 and len(_component_indices(graph)) == 1


def _bfs(graph: Graph, source: int) -> np.ndarray:
    dist = np.full(len(graph), math.inf)
    dist[source] = 0
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j, _ in graph.adjacency[i]:
            if dist[j] == math.inf:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def combinatorial_distance(graph: Graph, x: str, y: str) -> float:
    """Least number of edges on a path from ``x`` to ``y``.

    Integer valued; ``math.inf`` between different components.
    """
    i, j = graph.position(x), graph.position(y)
    d = _bfs(graph, i)[j]
    return d if d == math.inf else int(d)


def combinatorial_distances(graph: Graph) -> np.ndarray:
    """All-pairs matrix of :func:`combinatorial_distance` (float, inf allowed)."""
    return np.array([_bfs(graph, i) for i in range(len(graph))]).reshape(len(graph), len(graph))


def degrees(graph: Graph, m: Measure) -> np.ndarray:
    """Generalized degree ``(sum_y b(x, y) + c(x)) / m(x)`` per vertex."""
    return (graph.weighted_degree + graph.killing_array) / check_measure(graph, m)


def generalized_degree(graph: Graph, m: Measure, x: str) -> float:
    return float(degrees(graph, m)[graph.position(x)])


def _huang_lengths(graph: Graph, m: Measure) -> np.ndarray:
    deg = degrees(graph, m)
    with np.errstate(divide="ignore"):
        # Deg = 0 only at isolated unkilled vertices, which carry no edges
        return np.where(deg > 0, 1.0 / np.sqrt(deg), math.inf)


def _dijkstra(graph: Graph, inv_sqrt_deg: np.ndarray, source: int) -> np.ndarray:
    dist = np.full(len(graph), math.inf)
    dist[source] = 0.0
    done = [False] * len(graph)
    # heap ties resolve on the vertex index, i.e. lexicographically
    heap = [(0.0, source)]
    while heap:
        d, i = heapq.heappop(heap)
        if done[i]:
            continue
        done[i] = True
        for j, _ in graph.adjacency[i]:
            nd = d + min(inv_sqrt_deg[i], inv_sqrt_deg[j])
            if nd < dist[j]:
                dist[j] = nd
                heapq.heappush(heap, (nd, j))
    return dist


def huang_metric(graph: Graph, m: Measure, x: str, y: str) -> float:
    """Path metric with edge length ``min(Deg(u)**-0.5, Deg(v)**-0.5)``."""
    i, j = graph.position(x), graph.position(y)
    return float(_dijkstra(graph, _huang_lengths(graph, m), i)[j])


def huang_distances(graph: Graph, m: Measure) -> np.ndarray:
    lengths = _huang_lengths(graph, m)
    n = len(graph)
    return np.array([_dijkstra(graph, lengths, i) for i in range(n)]).reshape(n, n)


@dataclass(frozen=True)
class IntrinsicReport:
    intrinsic: bool
    worst_vertex: str | None
    slack: float  # min over x of m(x) - sum_y b(x, y) delta(x, y)**2
    slacks: tuple[float, ...]

    def __bool__(self):
        return self.intrinsic


def is_intrinsic(graph: Graph, m: Measure, delta) -> IntrinsicReport:
    """Check ``sum_y b(x, y) delta(x, y)**2 <= m(x)`` at every vertex.

    ``delta`` is a symmetric matrix over the canonical vertex order.
    Infinite entries only matter where ``b`` is positive.
    """
    mass = check_measure(graph, m)
    delta = np.asarray(delta, dtype=float)
    n = len(graph)
    if delta.shape != (n, n):
        raise ValidationError(f"delta must be {n}x{n}")
    if n == 0:
        return IntrinsicReport(True, None, math.inf, ())
    i, j, w = graph.edge_arrays
    contrib = w * delta[i, j] ** 2
    load = np.bincount(i, contrib, minlength=n) + np.bincount(j, contrib, minlength=n)
    slack = mass - load
    worst = int(np.argmin(slack))
    return IntrinsicReport(
        intrinsic=bool(np.all(slack >= -INEQUALITY_TOL)),
        worst_vertex=graph.vertices[worst],
        slack=float(slack[worst]),
        slacks=tuple(float(s) for s in slack),
    )


def gradient_norms(graph: Graph, m: Measure, f) -> np.ndarray:
    """``sqrt(sum_y b(x, y) |f(x) - f(y)|**2 / m(x))`` at every vertex."""
    mass = check_measure(graph, m)
    f = graph.function(f)
    i, j, w = graph.edge_arrays
    sq = w * (f[i] - f[j]) ** 2
    n = len(graph)
    return np.sqrt((np.bincount(i, sq, minlength=n) + np.bincount(j, sq, minlength=n)) / mass)


def gradient_norm(graph: Graph, m: Measure, f, x: str) -> float:
    return float(gradient_norms(graph, m, f)[graph.position(x)])


def in_A(graph: Graph, m: Measure, f) -> bool:
    """Whether every local gradient norm is at most one."""
    g = gradient_norms(graph, m, f)
    # compare squares so exact boundary cases like 1 <= 1 stay exact
    return bool(np.all(g ** 2 <= 1.0 + INEQUALITY_TOL))
