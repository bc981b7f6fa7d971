"""Small standard graphs and random instances used by the tests, the CLI and selftest."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .graph import Graph, Measure, make_measure, validate_graph


def path(lo: int, hi: int, weight: float = 1.0) -> Graph:
    """Integer path ``lo - (lo+1) - ... - hi``; vertex ids are the integers as strings."""
    ids = [str(k) for k in range(lo, hi + 1)]
    return validate_graph(ids, [(ids[k], ids[k + 1], weight) for k in range(len(ids) - 1)])


def complete(ids: Sequence[str], weight: float = 1.0) -> Graph:
    ids = list(ids)
    return validate_graph(ids, [(u, v, weight) for k, u in enumerate(ids) for v in ids[k + 1:]])


def triangle(weight: float = 1.0) -> Graph:
    return complete(["a", "b", "c"], weight)


def star(leaves: int, weight: float = 1.0, center_killing: float = 0.0) -> Graph:
    ids = ["c"] + [f"l{k}" for k in range(leaves)]
    return validate_graph(ids, [("c", v, weight) for v in ids[1:]],
                          {"c": center_killing} if center_killing else None)


def binary_tree(depth: int) -> Graph:
    """Rooted binary tree with unit weights; vertex ids are the 0/1 address strings, root ``"r"``."""
    ids, edges = ["r"], []
    frontier = ["r"]
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for bit in "01":
                child = (v + bit) if v != "r" else ("r" + bit)
                ids.append(child)
                edges.append((v, child, 1.0))
                nxt.append(child)
        frontier = nxt
    return validate_graph(ids, edges)


def random_connected(rng: np.random.Generator, n: int, density: float = 0.3,
                     weight_range: tuple[float, float] = (0.1, 10.0),
                     killing: bool = False, prefix: str = "v") -> Graph:
    """Random spanning tree plus extra random edges, weights uniform in ``weight_range``.

    With ``killing`` a random nonempty set of vertices gets a killing term
    drawn from the same range.
    """
    ids = [f"{prefix}{k:03d}" for k in range(n)]
    lo, hi = weight_range
    edges = {}
    order = rng.permutation(n)
    for k in range(1, n):
        a, b = int(order[k]), int(order[rng.integers(k)])
        edges[(min(a, b), max(a, b))] = rng.uniform(lo, hi)
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.random() < density:
                edges[(a, b)] = rng.uniform(lo, hi)
    kill = None
    if killing:
        chosen = rng.random(n) < 0.3
        chosen[rng.integers(n)] = True
        kill = {ids[k]: float(rng.uniform(lo, hi)) for k in range(n) if chosen[k]}
    return validate_graph(ids, [(ids[a], ids[b], float(w)) for (a, b), w in edges.items()], kill)


def random_measure(rng: np.random.Generator, graph: Graph,
                   value_range: tuple[float, float] = (0.1, 10.0)) -> Measure:
    return make_measure(graph, rng.uniform(*value_range, size=len(graph)))


def random_bijection(rng: np.random.Generator, vertices: Sequence[str]) -> dict[str, str]:
    vertices = list(vertices)
    perm = rng.permutation(len(vertices))
    return {v: vertices[int(p)] for v, p in zip(vertices, perm)}


def relabel(graph: Graph, mapping: Mapping[str, str], m: Measure | None = None,
            scale: float = 1.0) -> tuple[Graph, Measure | None]:
    """Copy of ``graph`` with vertices renamed through ``mapping``, and ``b``, ``c``, ``m``
    divided by ``scale``."""
    new = validate_graph(
        [mapping[v] for v in graph.vertices],
        [(mapping[u], mapping[v], w / scale) for u, v, w in graph.edges],
        {mapping[v]: c / scale for v, c in zip(graph.vertices, graph.killing)},
    )
    if m is None:
        return new, None
    return new, make_measure(new, {mapping[v]: a / scale for v, a in zip(graph.vertices, m.values)})
