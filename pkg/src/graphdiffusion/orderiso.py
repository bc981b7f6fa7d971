"""Order isomorphisms ``Uf = h * (f o tau)`` between two weighted graphs.

An order isomorphism from functions on ``X1`` to functions on ``X2`` is a
bijection ``tau: X2 -> X1`` together with a positive scaling ``h`` on
``X2``. When it intertwines the two Laplacians there is a constant
``beta > 0`` with

    m1(tau w)          = beta h(w)^2 m2(w)
    b1(tau x, tau y)   = beta h(x) h(y) b2(x, y)
    c1(tau z)          = beta h(z) (formal Laplacian of h in graph 2)(z)

This module verifies those relations for a given map and searches for all
maps that satisfy them between two given graphs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    NotBijective,
    NotConnected,
    NotConstantMultiplier,
    NotOrderIso,
    NotPositive,
    SearchBudgetExceeded,
    ValidationError,
)
from .graph import (
    Graph,
    Measure,
    check_measure,
    combinatorial_distances,
    degrees,
    huang_distances,
    is_connected,
)
from .operators import formal_laplacian, is_harmonic, is_superharmonic, laplacian_matrix, \
    quadratic_form
from .semigroup import heat_apply

ACCEPT_TOL = 1e-9
CONSTANCY_TOL = 1e-10
DEFAULT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class OrderIso:
    """Lamperti data of an order isomorphism from ``source`` (X1) to ``target`` (X2).

    ``tau[k]`` is the source vertex paired with ``target[k]`` and ``h[k]`` the
    positive scaling there.
    """

    source: tuple[str, ...]
    target: tuple[str, ...]
    tau: tuple[str, ...]
    h: tuple[float, ...]

    def __post_init__(self):
        if len(self.tau) != len(self.target) or len(self.h) != len(self.target):
            raise ValidationError("tau and h must be given for every target vertex")
        if len(self.source) != len(self.target) or sorted(self.tau) != sorted(self.source):
            raise NotBijective("tau is not a bijection onto the source vertices")
        if not all(v > 0 and math.isfinite(v) for v in self.h):
            raise NotPositive("scaling h must be finite and strictly positive")

    @classmethod
    def from_maps(cls, source: Sequence[str], target: Sequence[str],
                  tau: Mapping[str, str], h: Mapping[str, float] | None = None) -> OrderIso:
        target = tuple(target)
        missing = [y for y in target if y not in tau]
        if missing:
            raise NotBijective(f"tau undefined at {missing}")
        hv = tuple(1.0 if h is None else float(h[y]) for y in target)
        return cls(tuple(source), target, tuple(tau[y] for y in target), hv)

    @classmethod
    def identity(cls, vertices: Sequence[str]) -> OrderIso:
        v = tuple(vertices)
        return cls(v, v, v, (1.0,) * len(v))

    @cached_property
    def tau_index(self) -> np.ndarray:
        pos = {v: i for i, v in enumerate(self.source)}
        return np.array([pos[x] for x in self.tau], dtype=np.intp)

    @cached_property
    def h_array(self) -> np.ndarray:
        return np.array(self.h, dtype=float)

    @property
    def tau_map(self) -> dict[str, str]:
        return dict(zip(self.target, self.tau))

    @property
    def h_map(self) -> dict[str, float]:
        return dict(zip(self.target, self.h))

    def matrix(self) -> np.ndarray:
        """Matrix of ``U`` with rows indexed by target, columns by source."""
        n = len(self.target)
        U = np.zeros((n, n))
        U[np.arange(n), self.tau_index] = self.h_array
        return U

    def with_h(self, h) -> OrderIso:
        return OrderIso(self.source, self.target, self.tau, tuple(float(v) for v in h))


def decompose_order_iso(M, source: Sequence[str] | None = None,
                        target: Sequence[str] | None = None) -> OrderIso:
    """Read ``(tau, h)`` off a matrix with one positive entry per row and column.

    Rows of ``M`` are target coordinates, columns source coordinates.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotOrderIso(f"order isomorphisms are square, got shape {M.shape}")
    n = M.shape[0]
    source = tuple(source) if source is not None else tuple(str(i) for i in range(n))
    target = tuple(target) if target is not None else tuple(str(i) for i in range(n))
    if np.any(M < 0):
        raise NotOrderIso("matrix has a negative entry")
    nz = M != 0
    if np.any(nz.sum(axis=1) != 1) or np.any(nz.sum(axis=0) != 1):
        raise NotOrderIso("need exactly one nonzero entry in every row and column")
    cols = np.argmax(nz, axis=1)
    return OrderIso(source, target, tuple(source[j] for j in cols),
                    tuple(float(M[k, j]) for k, j in enumerate(cols)))


def apply(iso: OrderIso, f) -> np.ndarray:
    """``(Uf)(y) = h(y) f(tau(y))`` for ``f`` aligned with the source vertices."""
    f = np.asarray(f, dtype=float)
    return iso.h_array * f[iso.tau_index]


def adjoint_apply(iso: OrderIso, m1: Measure, m2: Measure, g) -> np.ndarray:
    """Adjoint of ``U`` for the m1- and m2-weighted inner products.

    ``(U* g)(x) = h(y) g(y) m2(y) / m1(x)`` where ``x = tau(y)``.
    """
    g = np.asarray(g, dtype=float)
    out = np.empty_like(g)
    out[iso.tau_index] = iso.h_array * g * m2.array
    return out / m1.array


def multiplier(iso: OrderIso, m1: Measure, m2: Measure) -> np.ndarray:
    """``U*U`` as a multiplication operator on the source: ``m2 h^2 / m1`` pulled back."""
    out = np.empty(len(iso.source))
    out[iso.tau_index] = m2.array * iso.h_array ** 2
    return out / m1.array


def beta_of(iso: OrderIso, G1: Graph, m1: Measure, m2: Measure,
            tol: float = CONSTANCY_TOL) -> float:
    """The constant ``beta`` with ``U*U = 1/beta``; refuses if ``U*U`` is not constant."""
    if not is_connected(G1):
        raise NotConnected("beta is only pinned on a connected source graph")
    phi = multiplier(iso, m1, m2)
    if phi.max() - phi.min() > tol * phi.max():
        raise NotConstantMultiplier(
            f"U*U ranges over [{phi.min():.6g}, {phi.max():.6g}]; U cannot intertwine")
    return float(1.0 / phi.mean())


def _check_pair(G1, m1, G2, m2, iso):
    check_measure(G1, m1)
    check_measure(G2, m2)
    if iso.source != G1.vertices or iso.target != G2.vertices:
        raise ValidationError("order isomorphism does not match the graphs' vertex sets")


def generator_residual(L1: np.ndarray, L2: np.ndarray, iso: OrderIso) -> float:
    """``||U L1 - L2 U||_F / (1 + ||L1||_F)``."""
    h, tau = iso.h_array, iso.tau_index
    UL1 = h[:, None] * L1[tau, :]
    L2U = np.zeros_like(L2)
    L2U[:, tau] = L2 * h[None, :]
    return float(np.linalg.norm(UL1 - L2U) / (1.0 + np.linalg.norm(L1)))


@dataclass(frozen=True)
class IntertwiningResidual:
    generator: float
    semigroup: float

    @property
    def worst(self) -> float:
        return max(self.generator, self.semigroup)


def verify_intertwining(G1: Graph, m1: Measure, G2: Graph, m2: Measure, iso: OrderIso,
                        seed: int = 0, times: Sequence[float] = (0.1, 1.0, 10.0),
                        samples: int = 5) -> IntertwiningResidual:
    """Measure how far ``U`` is from intertwining the two heat semigroups.

    The generator residual is exact evidence on finite graphs; the
    semigroup residual spot-checks ``U exp(-t L1) f`` against
    ``exp(-t L2) U f`` in the m2-norm, relative to ``||U f||``.
    """
    _check_pair(G1, m1, G2, m2, iso)
    gen = generator_residual(laplacian_matrix(G1, m1), laplacian_matrix(G2, m2), iso)
    rng = np.random.default_rng(seed)
    worst = 0.0
    w2 = m2.array
    for _ in range(samples):
        f = rng.standard_normal(len(G1))
        Uf = apply(iso, f)
        scale = math.sqrt(float(np.sum(Uf ** 2 * w2)))
        for t in times:
            diff = apply(iso, heat_apply(G1, m1, t, f)) - heat_apply(G2, m2, t, Uf)
            worst = max(worst, math.sqrt(float(np.sum(diff ** 2 * w2))) / scale)
    return IntertwiningResidual(gen, worst)


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Relative gap measured against the left side; 1 where only the right side is nonzero."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    denom = np.where(lhs != 0, np.abs(lhs), np.abs(rhs))
    gap = np.abs(lhs - rhs)
    return np.divide(gap, denom, out=np.zeros_like(gap), where=denom > 0)


@dataclass(frozen=True)
class IntertwinerCertificate:
    iso: OrderIso
    beta: float
    residuals: dict[str, float] = field(hash=False)
    tol: float = ACCEPT_TOL

    @property
    def accepted(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def to_json(self) -> dict:
        return {
            "tau": self.iso.tau_map,
            "h": self.iso.h_map,
            "beta": self.beta,
            "residuals": dict(self.residuals),
            "accepted": self.accepted,
        }


def structure_residuals(G1: Graph, m1: Measure, G2: Graph, m2: Measure,
                        iso: OrderIso, beta: float) -> dict[str, float]:
    """Worst relative violation of each of the three structure equations."""
    h, tau = iso.h_array, iso.tau_index
    mass = _rel(m1.array[tau], beta * h ** 2 * m2.array)

    B1 = G1.weight_matrix()[np.ix_(tau, tau)]
    B2 = G2.weight_matrix()
    weight = _rel(B1, beta * np.outer(h, h) * B2)

    c1 = G1.killing_array[tau]
    rhs = beta * h * formal_laplacian(G2, h)
    # size of the terms that cancel inside the formal Laplacian
    scale = beta * h * (h * (G2.weighted_degree + G2.killing_array) + B2 @ h)
    scale = np.maximum(scale, np.abs(c1))
    gap = np.abs(c1 - rhs)
    killing = np.divide(gap, scale, out=np.zeros_like(gap), where=scale > 0)

    def worst(a):
        return float(a.max()) if a.size else 0.0

    return {"measure": worst(mass), "weight": worst(weight), "killing": worst(killing)}


def unitarity_residual(iso: OrderIso, m1: Measure, m2: Measure, beta: float,
                       samples: int = 20, seed: int = 0) -> float:
    """Worst relative gap between ``sqrt(beta) ||Uf||_m2`` and ``||f||_m1``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f = rng.standard_normal(len(iso.source))
        n1 = math.sqrt(float(np.sum(f ** 2 * m1.array)))
        n2 = math.sqrt(beta * float(np.sum(apply(iso, f) ** 2 * m2.array)))
        worst = max(worst, abs(n2 - n1) / n1)
    return worst


def verify_structure_equations(G1: Graph, m1: Measure, G2: Graph, m2: Measure,
                               iso: OrderIso, beta: float, tol: float = ACCEPT_TOL,
                               seed: int = 0) -> IntertwinerCertificate:
    """Certificate holding generator, structure-equation and unitarity residuals."""
    _check_pair(G1, m1, G2, m2, iso)
    if not beta > 0:
        raise NotPositive(f"beta must be positive, got {beta}")
    residuals = {"generator": generator_residual(laplacian_matrix(G1, m1),
                                                 laplacian_matrix(G2, m2), iso)}
    residuals.update(structure_residuals(G1, m1, G2, m2, iso, beta))
    residuals["unitarity"] = unitarity_residual(iso, m1, m2, beta, seed=seed)
    return IntertwinerCertificate(iso, float(beta), residuals, tol)


def form_transport_residual(G1: Graph, G2: Graph, iso: OrderIso, beta: float,
                            samples: int = 20, seed: int = 0) -> float:
    """Worst relative gap in ``Q1(f, g) = beta Q2(Uf, Ug)`` over random pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        f, g = rng.standard_normal((2, len(iso.source)))
        q1 = quadratic_form(G1, f, g)
        q2 = beta * quadratic_form(G2, apply(iso, f), apply(iso, g))
        scale = max(abs(q1), math.sqrt(quadratic_form(G1, f) * quadratic_form(G1, g)), 1e-300)
        worst = max(worst, abs(q1 - q2) / scale)
    return worst


def certificate_invariants(G1: Graph, m1: Measure, G2: Graph, m2: Measure,
                           cert: IntertwinerCertificate, seed: int = 0) -> dict[str, float | bool]:
    """Facts every genuine intertwiner has, recomputed from scratch.

    Degrees match under ``tau``; ``tau`` is an isometry for the combinatorial
    and Huang metrics; ``sqrt(beta) U`` is unitary; ``h`` is superharmonic
    for graph 2, and harmonic exactly when graph 1 has no killing.
    """
    iso, tau = cert.iso, cert.iso.tau_index
    d1, d2 = degrees(G1, m1)[tau], degrees(G2, m2)
    deg_gap = float(np.max(_rel(d1, d2))) if len(d1) else 0.0

    D1 = combinatorial_distances(G1)[np.ix_(tau, tau)]
    D2 = combinatorial_distances(G2)
    R1 = huang_distances(G1, m1)[np.ix_(tau, tau)]
    R2 = huang_distances(G2, m2)
    finite = np.isfinite(R1) & np.isfinite(R2)
    rho_gap = float(np.max(np.abs(R1 - R2)[finite], initial=0.0))
    if np.any(np.isfinite(R1) != np.isfinite(R2)):
        rho_gap = math.inf

    h = iso.h_array
    no_killing = bool(np.max(np.abs(G1.killing_array), initial=0.0) <= 1e-12)
    return {
        "degree": deg_gap,
        "d_isometry": bool(np.array_equal(D1, D2)),
        "rho": rho_gap,
        "unitarity": unitarity_residual(iso, m1, m2, cert.beta, seed=seed),
        "superharmonic": is_superharmonic(G2, h),
        "harmonic_iff_unkilled": is_harmonic(G2, h) == no_killing,
        "superharmonic_slack": float(np.min(formal_laplacian(G2, h), initial=0.0)),
    }


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def _shared_labels(arrays: Sequence[np.ndarray], tol: float) -> list[np.ndarray]:
    """Integer labels that agree across arrays for values equal up to ``tol`` (relative).

    Sorted values are split wherever consecutive gaps exceed the tolerance;
    infinities get label -1.
    """
    flat = np.concatenate([a.ravel() for a in arrays]) if arrays else np.zeros(0)
    finite = np.isfinite(flat)
    labels = np.full(flat.shape, -1, dtype=np.int64)
    vals = flat[finite]
    if vals.size:
        order = np.argsort(vals, kind="stable")
        s = vals[order]
        gaps = np.diff(s) > tol * np.maximum(1.0, np.abs(s[1:]))
        lab = np.concatenate([[0], np.cumsum(gaps)])
        sub = np.empty(vals.size, dtype=np.int64)
        sub[order] = lab
        labels[finite] = sub
    out, start = [], 0
    for a in arrays:
        out.append(labels[start:start + a.size].reshape(a.shape))
        start += a.size
    return out


class _Side:
    def __init__(self, graph: Graph, m: Measure):
        self.graph = graph
        self.mass = check_measure(graph, m)
        self.deg = degrees(graph, m)
        D = combinatorial_distances(graph)
        self.dist = np.where(np.isfinite(D), D, -1).astype(np.int64)
        self.rho = huang_distances(graph, m)
        self.B = graph.weight_matrix()


def _colorings(s1: _Side, s2: _Side, tol: float) -> tuple[np.ndarray, np.ndarray]:
    deg1, deg2 = _shared_labels([s1.deg, s2.deg], tol)
    rho1, rho2 = _shared_labels([s1.rho, s2.rho], tol)

    def initial(side, deg, rho):
        return [(int(deg[v]),
                 tuple(sorted(Counter(side.dist[v].tolist()).items())),
                 tuple(sorted(rho[v].tolist())))
                for v in range(len(deg))]

    sigs = [initial(s1, deg1, rho1), initial(s2, deg2, rho2)]
    n = len(deg1)
    colors = _relabel(sigs)
    classes = len(set(colors[0]) | set(colors[1]))
    for _ in range(n):
        sigs = [[(int(c[v]), tuple(sorted(zip(side.dist[v].tolist(), c.tolist()))))
                 for v in range(n)]
                for side, c in ((s1, colors[0]), (s2, colors[1]))]
        colors = _relabel(sigs)
        refined = len(set(colors[0]) | set(colors[1]))
        if refined == classes:
            break
        classes = refined
    return colors[0], colors[1]


def _relabel(sigs):
    table = {s: k for k, s in enumerate(sorted(set(sigs[0]) | set(sigs[1])))}
    return [np.array([table[s] for s in side], dtype=np.int64) for side in sigs]


def reconstruct(G1: Graph, m1: Measure, G2: Graph, m2: Measure,
                max_solutions: int = 16, root: str | None = None,
                budget: int = DEFAULT_BUDGET, tol: float = ACCEPT_TOL,
                seed: int = 0) -> list[IntertwinerCertificate]:
    """Find order isomorphisms intertwining the Laplacians of two connected graphs.

    Candidate bijections respect degree, distance-sphere and Huang-sphere
    colorings; each partial bijection must keep the weight equation with
    ``h`` fixed by the measure equation under the gauge ``h(root) = 1``.
    Every complete candidate is re-verified from scratch and returned
    only if its certificate is accepted. An empty list means no
    intertwiner exists.
    """
    if not (is_connected(G1) and is_connected(G2)):
        raise NotConnected("reconstruct needs connected graphs; match components separately")
    n = len(G2)
    if len(G1) != n:
        return []
    root = G2.vertices[0] if root is None else root
    r = G2.position(root)

    s1, s2 = _Side(G1, m1), _Side(G2, m2)
    col1, col2 = _colorings(s1, s2, tol)
    if sorted(col1.tolist()) != sorted(col2.tolist()):
        return []

    by_color: dict[int, list[int]] = {}
    for x in range(n):
        by_color.setdefault(int(col1[x]), []).append(x)
    size = Counter(col2.tolist())
    rest = sorted((v for v in range(n) if v != r),
                  key=lambda v: (size[int(col2[v])], s2.dist[r, v], v))
    order = [r] + rest

    assign = np.full(n, -1, dtype=np.intp)     # target -> source
    used = np.zeros(n, dtype=bool)
    h = np.zeros(n)
    placed: list[int] = []
    beta = 0.0
    nodes = 0
    found: list[IntertwinerCertificate] = []

    def consistent(x: int, y: int) -> bool:
        if not placed:
            return True
        ys = np.array(placed, dtype=np.intp)
        xs = assign[ys]
        if np.any(s1.dist[x, xs] != s2.dist[y, ys]):
            return False
        r1, r2 = s1.rho[x, xs], s2.rho[y, ys]
        if np.any(np.abs(r1 - r2) > tol * np.maximum(1.0, np.abs(r2))):
            return False
        hy = math.sqrt(s1.mass[x] / (beta * s2.mass[y]))
        lhs = s1.B[x, xs]
        rhs = beta * hy * h[ys] * s2.B[y, ys]
        if np.any((lhs == 0) != (rhs == 0)):
            return False
        return not np.any(_rel(lhs, rhs) > tol)

    iters: list = [None] * n
    depth = 0
    iters[0] = iter(by_color.get(int(col2[r]), []))
    while depth >= 0 and len(found) < max_solutions:
        y = order[depth]
        if assign[y] >= 0:
            used[assign[y]] = False
            assign[y] = -1
            placed.pop()
        moved = False
        for x in iters[depth]:
            if used[x]:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded(f"search exceeded {budget} nodes")
            if depth == 0:
                beta = s1.mass[x] / s2.mass[y]
            if consistent(x, y):
                assign[y] = x
                used[x] = True
                h[y] = math.sqrt(s1.mass[x] / (beta * s2.mass[y]))
                placed.append(y)
                moved = True
                break
        if not moved:
            depth -= 1
            continue
        if depth == n - 1:
            iso = OrderIso(G1.vertices, G2.vertices,
                           tuple(G1.vertices[x] for x in assign), tuple(float(v) for v in h))
            cert = verify_structure_equations(G1, m1, G2, m2, iso, beta, tol=tol, seed=seed)
            if cert.accepted:
                found.append(cert)
            continue
        depth += 1
        iters[depth] = iter(by_color.get(int(col2[order[depth]]), []))

    return sorted(found, key=lambda c: c.iso.tau)
