"""Recurrence and transience.

On a finite graph the answer is structural: a connected component is
recurrent exactly when it carries no killing. For large finite
truncations standing in for infinite graphs, :func:`capacity_sequence`
tracks the capacity of the root along a nested exhaustion; capacities
tending to zero indicate recurrence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg, spsolve

from .errors import HypothesisViolated, InconsistentVerdict, InvalidExhaustion, SingularSystem
from .graph import Graph, _bfs, _component_indices, is_connected, total_edge_weight
from .gst import find_positive_superharmonic
from .operators import quadratic_form

CG_THRESHOLD = 500
DECAY_FACTOR = 0.05
STABLE_SPREAD = 0.02
POSITIVE_FLOOR = 1e-3
FIT_R2 = 0.95


class Verdict(str, enum.Enum):
    RECURRENT = "Recurrent"
    TRANSIENT = "Transient"


class Trend(str, enum.Enum):
    RECURRENT = "RecurrentTrend"
    TRANSIENT = "TransientTrend"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ComponentVerdict:
    vertices: tuple[str, ...]
    verdict: Verdict


def classify_finite(graph: Graph) -> list[ComponentVerdict]:
    """Per component: recurrent iff the killing term vanishes on it."""
    out = []
    for block in _component_indices(graph):
        killed = bool(np.any(graph.killing_array[block] > 0))
        out.append(ComponentVerdict(tuple(graph.vertices[i] for i in block),
                                    Verdict.TRANSIENT if killed else Verdict.RECURRENT))
    return out


@dataclass(frozen=True)
class Exhaustion:
    """Strictly nested vertex sets of a finite host graph, all containing ``root``."""

    host: Graph
    root: str
    subsets: tuple[frozenset[str], ...]

    def __post_init__(self):
        self.host.position(self.root)
        if not self.subsets:
            raise InvalidExhaustion("an exhaustion needs at least one subset")
        known = set(self.host.vertices)
        for k, s in enumerate(self.subsets):
            if not s <= known:
                raise InvalidExhaustion(f"subset {k + 1} has vertices outside the host: "
                                        f"{sorted(s - known)[:5]}")
            if self.root not in s:
                raise InvalidExhaustion(f"subset {k + 1} does not contain the root")
            if k and not self.subsets[k - 1] < s:
                raise InvalidExhaustion(f"subset {k + 1} does not strictly contain subset {k}")

    @classmethod
    def build(cls, host: Graph, root: str, subsets: Iterable[Iterable[str]]) -> Exhaustion:
        return cls(host, str(root), tuple(frozenset(map(str, s)) for s in subsets))


def balls(host: Graph, root: str, radii: Iterable[int]) -> list[frozenset[str]]:
    """Combinatorial balls around ``root`` for the given radii."""
    dist = _bfs(host, host.position(root))
    return [frozenset(v for v, d in zip(host.vertices, dist) if d <= r) for r in radii]


def _solve_spd(A: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    if A.shape[0] > CG_THRESHOLD:
        x, info = cg(A, rhs, rtol=1e-14, atol=0.0, maxiter=20 * A.shape[0])
        if info != 0:
            raise SingularSystem(f"conjugate gradient did not converge (info={info})")
        return x
    return np.atleast_1d(spsolve(A.tocsc(), rhs))


def capacity(host: Graph, root: str, subset: Iterable[str]) -> float:
    """Least energy of ``phi`` with ``phi(root) = 1`` and ``phi = 0`` off ``subset``.

    The minimizer is harmonic on ``subset`` minus the root, which is the
    linear system solved here.
    """
    o = host.position(root)
    inside = sorted(host.position(v) for v in set(subset))
    interior = [i for i in inside if i != o]
    phi = np.zeros(len(host))
    phi[o] = 1.0
    if interior:
        _check_solvable(host, interior)
        L = _sparse_laplacian(host)
        A = L[interior][:, interior]
        rhs = -np.asarray(L[interior][:, [o]].todense()).ravel()
        phi[interior] = _solve_spd(A, rhs)
        if not np.all(np.isfinite(phi)):
            raise SingularSystem("harmonic extension produced non-finite values")
    return quadratic_form(host, phi)


@lru_cache(maxsize=8)
def _sparse_laplacian(host: Graph) -> sp.csr_matrix:
    i, j, w = host.edge_arrays
    n = len(host)
    off = sp.coo_matrix((np.concatenate([-w, -w]), (np.concatenate([i, j]), np.concatenate([j, i]))),
                        shape=(n, n))
    return (off + sp.diags(host.weighted_degree + host.killing_array)).tocsr()


def _check_solvable(host: Graph, interior: list[int]):
    """Each interior piece must touch the boundary or carry killing, else the system is singular."""
    inner = set(interior)
    seen: set[int] = set()
    for start in interior:
        if start in seen:
            continue
        stack, piece, anchored = [start], [], False
        seen.add(start)
        while stack:
            a = stack.pop()
            piece.append(a)
            anchored = anchored or host.killing_array[a] > 0
            for b, _ in host.adjacency[a]:
                if b not in inner:
                    anchored = True
                elif b not in seen:
                    seen.add(b)
                    stack.append(b)
        if not anchored:
            names = [host.vertices[k] for k in sorted(piece)[:5]]
            raise SingularSystem(f"interior piece {names} is cut off from the boundary")


@dataclass(frozen=True)
class CapacityReport:
    caps: tuple[float, ...]
    sizes: tuple[int, ...]
    verdict: Trend
    fit: dict[str, float]

    def to_csv(self) -> str:
        lines = ["n,size,cap"]
        lines += [f"{k},{s},{c!r}" for k, (s, c) in enumerate(zip(self.sizes, self.caps), 1)]
        return "\n".join(lines) + "\n"


def _inverse_fit(caps: Sequence[float]) -> dict[str, float]:
    """Least-squares fit ``cap_n ~ slope / n + intercept`` (n counted from 1)."""
    y = np.asarray(caps, dtype=float)
    x = 1.0 / np.arange(1, len(y) + 1)
    if len(y) < 2:
        return {"slope": float("nan"), "intercept": float("nan"), "r2": float("nan")}
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / total if total > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def _trend(caps: Sequence[float], fit: dict[str, float]) -> Trend:
    if len(caps) >= 3:
        first = caps[0]
        if caps[-1] < DECAY_FACTOR * first and fit["r2"] >= FIT_R2 \
                and abs(fit["intercept"]) <= DECAY_FACTOR * first:
            return Trend.RECURRENT
        tail = caps[-3:]
        if min(tail) > POSITIVE_FLOOR and max(tail) / min(tail) - 1.0 <= STABLE_SPREAD:
            return Trend.TRANSIENT
    return Trend.INCONCLUSIVE


def capacity_sequence(ex: Exhaustion) -> CapacityReport:
    """Capacities of the root along the exhaustion and the trend they suggest.

    Trends are heuristics on finitely many values; the raw capacities are
    always part of the report.
    """
    caps = tuple(capacity(ex.host, ex.root, s) for s in ex.subsets)
    fit = _inverse_fit(caps)
    return CapacityReport(caps, tuple(len(s) for s in ex.subsets), _trend(caps, fit), fit)


def _require_unkilled_connected(graph: Graph):
    if not is_connected(graph):
        raise HypothesisViolated("graph must be connected")
    if np.any(graph.killing_array > 0):
        raise HypothesisViolated("graph must have vanishing killing term")


@dataclass(frozen=True)
class LiouvilleResult:
    recurrent: bool
    only_constant_superharmonic: bool


def liouville_check(graph: Graph) -> LiouvilleResult:
    """Recurrence and constancy of positive superharmonic functions, computed separately.

    For a connected graph without killing the two must agree; a
    disagreement raises :class:`InconsistentVerdict`.
    """
    _require_unkilled_connected(graph)
    recurrent = classify_finite(graph)[0].verdict is Verdict.RECURRENT
    only_constant = find_positive_superharmonic(graph, require_nonconstant=True) is None
    if recurrent != only_constant:
        raise InconsistentVerdict(
            f"recurrent={recurrent} but only-constant-superharmonic={only_constant}")
    return LiouvilleResult(recurrent, only_constant)


@dataclass(frozen=True)
class TotalWeightVerdict:
    verdict: Verdict
    total_edge_weight: float
    reason: str


def finite_total_weight_verdict(graph: Graph) -> TotalWeightVerdict:
    """Recurrence from finiteness of the total edge weight (automatic when finite)."""
    _require_unkilled_connected(graph)
    total = total_edge_weight(graph)
    structural = classify_finite(graph)[0].verdict
    if structural is not Verdict.RECURRENT:
        raise InconsistentVerdict("finite total edge weight but component classified transient")
    return TotalWeightVerdict(
        Verdict.RECURRENT, total,
        f"connected, no killing, total edge weight {total!r} is finite")

