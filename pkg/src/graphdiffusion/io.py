"""Graph JSON files.

Schema::

    {"vertices": ["a", "b"],
     "edges": [{"u": "a", "v": "b", "w": 1.0}],
     "killing": {"a": 0.5},
     "measure": {"a": 1.0, "b": 2.0}}

``killing`` entries default to 0 and ``measure`` is optional. An unordered
pair may appear only once in ``edges``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DuplicateEdge, ValidationError
from .graph import Graph, Measure, make_measure, validate_graph


def graph_from_json(data: dict[str, Any]) -> tuple[Graph, Measure | None]:
    if not isinstance(data, dict):
        raise ValidationError("graph JSON must be an object")
    unknown = set(data) - {"vertices", "edges", "killing", "measure"}
    if unknown:
        raise ValidationError(f"unknown keys {sorted(unknown)}")
    try:
        vertices = [str(v) for v in data["vertices"]]
        raw_edges = data.get("edges", [])
        edges, seen = [], set()
        for e in raw_edges:
            u, v, w = str(e["u"]), str(e["v"]), e["w"]
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise ValidationError(f"edge ({u}, {v}) weight must be a number")
            key = frozenset((u, v))
            if key in seen:
                raise DuplicateEdge(f"pair ({u}, {v}) listed twice")
            seen.add(key)
            edges.append((u, v, float(w)))
        killing = data.get("killing") or {}
        if not isinstance(killing, dict):
            raise ValidationError("killing must be an object")
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed graph JSON: {exc!r}") from None
    graph = validate_graph(vertices, edges, killing)
    measure = None
    if data.get("measure") is not None:
        if not isinstance(data["measure"], dict):
            raise ValidationError("measure must be an object")
        measure = make_measure(graph, data["measure"])
    return graph, measure


def graph_to_json(graph: Graph, measure: Measure | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "vertices": list(graph.vertices),
        "edges": [{"u": u, "v": v, "w": w} for u, v, w in graph.edges],
        "killing": {v: c for v, c in zip(graph.vertices, graph.killing) if c != 0},
    }
    if measure is not None:
        out["measure"] = dict(zip(measure.vertices, measure.values))
    return out


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None


def load_graph(path: str | Path) -> tuple[Graph, Measure | None]:
    return graph_from_json(read_json(path))


def save_graph(path: str | Path, graph: Graph, measure: Measure | None = None):
    Path(path).write_text(dumps(graph_to_json(graph, measure)) + "\n", encoding="utf-8")


def jsonable(obj: Any) -> Any:
    """Turn numpy values, tuples and non-finite floats into plain JSON values.

    Infinities become the strings ``"inf"`` / ``"-inf"`` and NaN becomes null.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, allow_nan=False)
