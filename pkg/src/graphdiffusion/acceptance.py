"""Acceptance suite: numbered criteria with fixed tolerances.

Each criterion is a function returning a :class:`CriterionResult`; the
random instances are drawn from ``numpy.random.default_rng(seed)`` so a run
is reproducible. ``run_all`` is what ``graphdiffusion selftest`` and the
acceptance tests execute.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import generators as gen
from .graph import (
    Graph,
    Measure,
    in_A,
    make_measure,
    normalizing_measure,
    uniform_measure,
    validate_graph,
)
from .gst import GstSpec, counterexample_pair, find_positive_superharmonic, gst_intertwiner, \
    ground_state_transform
from .operators import formal_laplacian, greens_formula_residual, laplacian_matrix
from .orderiso import (
    IntertwinerCertificate,
    apply,
    certificate_invariants,
    reconstruct,
    verify_intertwining,
)
from .recurrence import Exhaustion, Trend, balls, capacity_sequence
from .semigroup import heat_apply, heat_kernel, markov_operator, semigroup_matrix


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:>2}: {self.name} ({self.detail})"


@dataclass(frozen=True)
class Pair:
    """Certified intertwiner from ``(g1, m1)`` to ``(g2, m2)``."""

    g1: Graph
    m1: Measure
    g2: Graph
    m2: Measure
    cert: IntertwinerCertificate


def _fmt(x: float) -> str:
    return f"{x:.3g}"


# ---------------------------------------------------------------------------
# scenario generators; shared between the criteria and the invariant sweep
# ---------------------------------------------------------------------------

def gst_scenarios(seed: int = 0, count: int = 50, max_vertices: int = 30):
    """Random graphs (killing on every other one) with a random valid transform.

    Yields ``(graph, m, spec)``. ``h`` comes from the superharmonic LP,
    rescaled to maximum 1 so absolute sign tolerances stay meaningful.
    """
    rng = np.random.default_rng(seed)
    for k in range(count):
        n = int(rng.integers(2, max_vertices + 1))
        killed = k % 2 == 0
        g = gen.random_connected(rng, n, killing=killed)
        m = gen.random_measure(rng, g)
        h = find_positive_superharmonic(g, require_nonconstant=killed)
        if h is None:
            h = np.ones(n)
        h = h / h.max()
        tau = gen.random_bijection(rng, g.vertices)
        beta = float(rng.uniform(0.1, 10.0))
        yield g, m, GstSpec(tuple(float(v) for v in h), tau, beta)


def relabel_scenarios(seed: int = 1, count: int = 20, max_vertices: int = 20):
    """Unkilled random graphs and a relabeled copy scaled down by ``beta``.

    Yields ``(g1, m1, g2, m2, beta, mapping)`` with ``mapping`` from g1 to g2 ids.
    """
    rng = np.random.default_rng(seed)
    betas = (0.5, 2.0, 7.0)
    for k in range(count):
        n = int(rng.integers(2, max_vertices + 1))
        g1 = gen.random_connected(rng, n)
        m1 = gen.random_measure(rng, g1)
        perm = rng.permutation(n)
        mapping = {v: f"y{int(p):03d}" for v, p in zip(g1.vertices, perm)}
        beta = betas[k % 3]
        g2, m2 = gen.relabel(g1, mapping, m1, beta)
        yield g1, m1, g2, m2, beta, mapping


def _gst_pairs(seed: int) -> list[Pair]:
    out = []
    for g, m, spec in gst_scenarios(seed):
        iso, cert = gst_intertwiner(g, m, spec, seed=seed)
        gh, mh = ground_state_transform(g, m, spec)
        out.append(Pair(gh, mh, g, m, cert))
    return out


def _relabel_pairs(seed: int) -> list[Pair]:
    out = []
    for g1, m1, g2, m2, _, _ in relabel_scenarios(seed + 1):
        out += [Pair(g1, m1, g2, m2, c) for c in reconstruct(g1, m1, g2, m2, seed=seed)]
    return out


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def criterion_1(seed: int = 0) -> CriterionResult:
    gen_worst = semi_worst = 0.0
    rejected = 0
    for g, m, spec in gst_scenarios(seed):
        gh, mh = ground_state_transform(g, m, spec)
        iso, cert = gst_intertwiner(g, m, spec, seed=seed)
        U = iso.matrix()
        Lh, L = laplacian_matrix(gh, mh), laplacian_matrix(g, m)
        gen_worst = max(gen_worst, float(np.linalg.norm(U @ Lh - L @ U)
                                         / (1.0 + np.linalg.norm(L))))
        semi_worst = max(semi_worst,
                         verify_intertwining(gh, mh, g, m, iso, seed=seed).semigroup)
        rejected += not cert.accepted
    ok = gen_worst <= 1e-10 and semi_worst <= 1e-9 and rejected == 0
    return CriterionResult(1, "transform intertwines heat semigroups", ok,
                           f"50 graphs, generator {_fmt(gen_worst)} <= 1e-10, "
                           f"semigroup {_fmt(semi_worst)} <= 1e-9, rejected {rejected}",
                           {"generator": gen_worst, "semigroup": semi_worst, "rejected": rejected})


def criterion_2(seed: int = 0) -> CriterionResult:
    empty = 0
    h_spread = b_gap = m_gap = 0.0
    certs = 0
    for g1, m1, g2, m2, beta, _ in relabel_scenarios(seed + 1):
        found = reconstruct(g1, m1, g2, m2, seed=seed)
        empty += not found
        B1, B2 = g1.weight_matrix(), g2.weight_matrix()
        for c in found:
            certs += 1
            h, tau = c.iso.h_array, c.iso.tau_index
            h_spread = max(h_spread, float(h.max() / h.min() - 1.0))
            scaled = beta * B2
            nz = scaled != 0
            zero_ok = np.array_equal(B1[np.ix_(tau, tau)] != 0, nz)
            gap = np.abs(B1[np.ix_(tau, tau)][nz] - scaled[nz]) / scaled[nz]
            b_gap = max(b_gap, float(gap.max(initial=0.0)) if zero_ok else math.inf)
            m_gap = max(m_gap, float(np.max(np.abs(m1.array[tau] - beta * m2.array)
                                            / (beta * m2.array))))
    ok = empty == 0 and h_spread <= 1e-9 and b_gap <= 1e-9 and m_gap <= 1e-9
    return CriterionResult(2, "reconstruction of scaled relabelings", ok,
                           f"20 pairs, {certs} certificates, no-solution {empty}, "
                           f"h spread {_fmt(h_spread)}, b {_fmt(b_gap)}, m {_fmt(m_gap)} <= 1e-9",
                           {"empty": empty, "h_spread": h_spread, "b": b_gap, "m": m_gap})


def _all_pairs(seed: int) -> list[Pair]:
    pairs = _gst_pairs(seed) + _relabel_pairs(seed)
    ce = counterexample_pair(_two_vertex_killed(), uniform_measure(_two_vertex_killed()), seed)
    pairs.append(Pair(ce.graph, ce.measure, _two_vertex_killed(),
                      uniform_measure(_two_vertex_killed()), ce.certificate))
    return [p for p in pairs if p.cert.accepted]


def criterion_3(seed: int = 0) -> CriterionResult:
    pairs = _all_pairs(seed)
    worst = {"degree": 0.0, "rho": 0.0, "unitarity": 0.0, "slack": 0.0}
    d_fail = harm_fail = 0
    for p in pairs:
        inv = certificate_invariants(p.g1, p.m1, p.g2, p.m2, p.cert, seed=seed)
        worst["degree"] = max(worst["degree"], inv["degree"])
        worst["rho"] = max(worst["rho"], inv["rho"])
        worst["unitarity"] = max(worst["unitarity"], inv["unitarity"])
        worst["slack"] = min(worst["slack"], inv["superharmonic_slack"])
        d_fail += not inv["d_isometry"]
        harm_fail += not inv["harmonic_iff_unkilled"]
    ok = (worst["degree"] <= 1e-10 and d_fail == 0 and worst["rho"] <= 1e-10
          and worst["unitarity"] <= 1e-11 and worst["slack"] >= -1e-12 and harm_fail == 0)
    return CriterionResult(3, "invariants of accepted certificates", ok,
                           f"{len(pairs)} certificates, degree {_fmt(worst['degree'])}, "
                           f"d failures {d_fail}, rho {_fmt(worst['rho'])}, "
                           f"unitarity {_fmt(worst['unitarity'])}, "
                           f"min Lh {_fmt(worst['slack'])}, harmonic mismatch {harm_fail}",
                           {**worst, "d_fail": d_fail, "harmonic_fail": harm_fail,
                            "certificates": len(pairs)})


def _two_vertex_killed() -> Graph:
    return validate_graph(["1", "2"], [("1", "2", 1.0)], {"1": 1.0})


def criterion_4(seed: int = 0) -> CriterionResult:
    g = _two_vertex_killed()
    m = uniform_measure(g)
    ce = counterexample_pair(g, m, seed=seed)
    if ce is None:
        return CriterionResult(4, "non-uniqueness on a transient graph", False,
                               "no nonconstant superharmonic function found")
    res = verify_intertwining(ce.graph, ce.measure, g, m, ce.iso, seed=seed).worst
    b_diff = ce.differences["b"]
    ok = ce.certificate.accepted and res <= 1e-10 and b_diff >= 0.5
    return CriterionResult(4, "non-uniqueness on a transient graph", ok,
                           f"h={list(ce.h)}, residual {_fmt(res)} <= 1e-10, "
                           f"b difference {b_diff!r} >= 0.5",
                           {"residual": res, "b": b_diff, "h": list(ce.h)})


def criterion_5(seed: int = 0) -> CriterionResult:
    host = gen.path(-50, 50)
    path_rep = capacity_sequence(Exhaustion.build(host, "0", balls(host, "0", range(40))))
    path_gap = max(abs(c * n - 2.0) for n, c in enumerate(path_rep.caps, 1))

    tree = gen.binary_tree(12)
    tree_rep = capacity_sequence(Exhaustion.build(tree, "r", balls(tree, "r", range(12))))
    tree_gap = max(abs(c - 1.0) for c in tree_rep.caps[9:])

    ok = (path_gap <= 1e-9 and tree_gap <= 1e-3
          and path_rep.verdict is Trend.RECURRENT and tree_rep.verdict is Trend.TRANSIENT)
    return CriterionResult(5, "capacities on path and binary tree", ok,
                           f"path |n cap_n - 2| {_fmt(path_gap)} <= 1e-9 "
                           f"({path_rep.verdict.value}); tree |cap_n - 1| for n>=10 "
                           f"{_fmt(tree_gap)} <= 1e-3 ({tree_rep.verdict.value})",
                           {"path": path_gap, "tree": tree_gap,
                            "path_verdict": path_rep.verdict.value,
                            "tree_verdict": tree_rep.verdict.value})


def criterion_6(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 6)
    false_pos = missed = invalid = 0
    for _ in range(30):
        g = gen.random_connected(rng, int(rng.integers(2, 16)))
        false_pos += find_positive_superharmonic(g, require_nonconstant=True) is not None
    for _ in range(30):
        g = gen.random_connected(rng, int(rng.integers(2, 16)), killing=True)
        h = find_positive_superharmonic(g, require_nonconstant=True)
        if h is None:
            missed += 1
            continue
        Lh = formal_laplacian(g, h)
        spread = h.max() / h.min() - 1.0
        invalid += not (np.all(h > 0) and np.all(Lh >= -1e-12 * max(1.0, h.max()))
                        and spread > 1e-6)
    ok = false_pos == 0 and missed == 0 and invalid == 0
    return CriterionResult(6, "positive superharmonic functions vs killing", ok,
                           f"unkilled with nonconstant h {false_pos}/30, killed without "
                           f"{missed}/30, invalid {invalid}",
                           {"false_positive": false_pos, "missed": missed, "invalid": invalid})


def criterion_7(seed: int = 0) -> CriterionResult:
    g = validate_graph(["1", "2"], [("1", "2", 1.0)])
    m = uniform_measure(g)
    closed = 0.0
    for t in (0.1, 1.0, 5.0):
        e = math.exp(-2 * t)
        closed = max(closed, abs(heat_kernel(g, m, t, "1", "1") - (1 + e) / 2),
                     abs(heat_kernel(g, m, t, "1", "2") - (1 - e) / 2))

    rng = np.random.default_rng(seed + 7)
    law = 0.0
    for k in range(20):
        gr = gen.random_connected(rng, int(rng.integers(2, 21)), killing=bool(k % 2))
        mr = gen.random_measure(rng, gr)
        s, t = rng.uniform(0, 3, size=2)
        lhs = semigroup_matrix(gr, mr, s + t)
        rhs = semigroup_matrix(gr, mr, s) @ semigroup_matrix(gr, mr, t)
        law = max(law, float(np.max(np.abs(lhs - rhs))))

    violations = 0
    for k in range(100):
        gr = gen.random_connected(rng, int(rng.integers(2, 21)), killing=bool(k % 2))
        mr = gen.random_measure(rng, gr)
        f = rng.uniform(0, 1, size=len(gr))
        u = heat_apply(gr, mr, float(rng.uniform(0, 10)), f)
        violations += not (np.all(u >= -1e-12) and np.all(u <= 1 + 1e-12))
    ok = closed <= 1e-12 and law <= 1e-11 and violations == 0
    return CriterionResult(7, "heat kernel exactness", ok,
                           f"two-vertex closed form {_fmt(closed)} <= 1e-12, semigroup law "
                           f"{_fmt(law)} <= 1e-11, sub-Markov violations {violations}/100",
                           {"closed_form": closed, "law": law, "violations": violations})


def criterion_8(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 8)
    worst = 0.0
    for k in range(100):
        g = gen.random_connected(rng, int(rng.integers(2, 21)), killing=bool(k % 2))
        f, v = rng.uniform(-1, 1, size=(2, len(g)))
        worst = max(worst, greens_formula_residual(g, f, v))
    return CriterionResult(8, "Green's formula", worst <= 1e-12,
                           f"100 instances, residual {_fmt(worst)} <= 1e-12",
                           {"residual": worst})


def criterion_9(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 9)
    markov = harmonic = spread = 0.0
    empty = 0
    for _ in range(20):
        g = gen.random_connected(rng, int(rng.integers(2, 16)))
        n = normalizing_measure(g)
        c = float(rng.uniform(0.2, 5.0))
        spec = GstSpec((c,) * len(g), gen.random_bijection(rng, g.vertices),
                       float(rng.uniform(0.1, 10.0)))
        gh, _ = ground_state_transform(g, n, spec)
        nh = normalizing_measure(gh)
        iso, _ = gst_intertwiner(g, n, spec, seed=seed)
        U = iso.matrix()
        P1, P2 = markov_operator(gh), markov_operator(g)
        markov = max(markov, float(np.linalg.norm(U @ P1 - P2 @ U)))
        h = iso.h_array
        harmonic = max(harmonic, float(np.max(np.abs(P2 @ h - h))))
        found = reconstruct(gh, nh, g, n, seed=seed)
        empty += not found
        for cert in found:
            spread = max(spread, float(cert.iso.h_array.max() / cert.iso.h_array.min() - 1))
    ok = markov <= 1e-11 and harmonic <= 1e-11 and empty == 0 and spread <= 1e-9
    return CriterionResult(9, "discrete-time intertwining", ok,
                           f"20 pairs, |UP1 - P2U| {_fmt(markov)} <= 1e-11, |P2h - h| "
                           f"{_fmt(harmonic)} <= 1e-11, reconstructed h spread {_fmt(spread)}, "
                           f"no-solution {empty}",
                           {"markov": markov, "harmonic": harmonic, "spread": spread,
                            "empty": empty})


def _standard_graph(rng: np.random.Generator, n: int) -> Graph:
    g = gen.random_connected(rng, n)
    return validate_graph(g.vertices, [(u, v, 1.0) for u, v, _ in g.edges])


def criterion_10(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 10)
    unit_gap = 0.0
    empty = mismatch = 0
    for k in range(20):
        g1 = gen.random_connected(rng, int(rng.integers(2, 16)), killing=bool(k % 2))
        mapping = {v: f"y{int(p):03d}" for v, p in zip(g1.vertices, rng.permutation(len(g1)))}
        g2, _ = gen.relabel(g1, mapping)
        found = reconstruct(g1, uniform_measure(g1), g2, uniform_measure(g2), seed=seed)
        empty += not found
        for c in found:
            tau = c.iso.tau_index
            unit_gap = max(unit_gap,
                           float(np.max(np.abs(g1.weight_matrix()[np.ix_(tau, tau)]
                                               - g2.weight_matrix()))),
                           float(np.max(np.abs(g1.killing_array[tau] - g2.killing_array))))
    for _ in range(20):
        g1 = _standard_graph(rng, int(rng.integers(2, 16)))
        mapping = {v: f"y{int(p):03d}" for v, p in zip(g1.vertices, rng.permutation(len(g1)))}
        g2, _ = gen.relabel(g1, mapping)
        found = reconstruct(g1, normalizing_measure(g1), g2, normalizing_measure(g2), seed=seed)
        empty += not found
        for c in found:
            tau = c.iso.tau_index
            mismatch += not np.array_equal(g1.weight_matrix()[np.ix_(tau, tau)],
                                           g2.weight_matrix())
    ok = unit_gap <= 1e-10 and mismatch == 0 and empty == 0
    return CriterionResult(10, "unit measure and standard weights", ok,
                           f"unit-measure b/c gap {_fmt(unit_gap)} <= 1e-10, standard-weight "
                           f"mismatches {mismatch}, no-solution {empty}",
                           {"unit_gap": unit_gap, "mismatch": mismatch, "empty": empty})


def criterion_11(seed: int = 0) -> CriterionResult:
    g = gen.path(-1, 1)
    m = uniform_measure(g)
    f_plus = g.indicator("1")
    f_minus = g.indicator("-1")
    plus = in_A(g, m, f_plus)
    both = in_A(g, m, f_plus + f_minus)
    ok = plus is True and both is False
    return CriterionResult(11, "gradient bound is not closed under sums", ok,
                           f"in_A(f+)={plus}, in_A(f+ + f-)={both}",
                           {"f_plus": plus, "sum": both})


CRITERIA: dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
    11: criterion_11,
}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number](seed)
    res.seconds = time.perf_counter() - start
    return res


def run_all(seed: int = 0, only=None) -> list[CriterionResult]:
    return [run_criterion(k, seed) for k in (only or sorted(CRITERIA))]
