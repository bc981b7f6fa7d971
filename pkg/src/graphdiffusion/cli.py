"""Command-line interface.

Every command reads graph JSON files and writes JSON to stdout (CSV with
``--csv`` where tabular). Exit status: 0 on success, 1 on a domain error,
2 on malformed input or usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from typing import Sequence

import numpy as np

from . import acceptance
from .errors import DomainError, GraphDiffusionError, ValidationError
from .graph import (
    Graph,
    Measure,
    combinatorial_distance,
    combinatorial_distances,
    connected_components,
    degrees,
    huang_metric,
    is_connected,
    normalizing_measure,
    total_edge_weight,
    uniform_measure,
)
from .gst import GstSpec, counterexample_pair, find_positive_superharmonic, ground_state_transform
from .io import dumps, graph_to_json, load_graph, read_json
from .operators import laplacian_matrix, norm_bound_report
from .orderiso import ACCEPT_TOL, reconstruct
from .recurrence import Exhaustion, balls, capacity_sequence, classify_finite
from .semigroup import green_function, heat_kernel_matrix, heat_trajectory, markov_operator


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(f"{self.prog}: {message}")


def _measure(graph: Graph, given: Measure | None, kind: str) -> Measure:
    if given is not None:
        return given
    return normalizing_measure(graph) if kind == "normalizing" else uniform_measure(graph)


def _load(path: str, kind: str) -> tuple[Graph, Measure]:
    graph, m = load_graph(path)
    return graph, _measure(graph, m, kind)


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _csv(header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    sys.stdout.write(buf.getvalue())


def _vertex_function(graph: Graph, path: str | None, default: float = 0.0) -> np.ndarray:
    if path is None:
        return np.full(len(graph), default)
    data = read_json(path)
    if not isinstance(data, (dict, list)):
        raise ValidationError(f"{path}: expected an object keyed by vertex or a list")
    return graph.function(data, default=default)


def _matrix_payload(graph: Graph, M: np.ndarray) -> dict:
    return {"vertices": list(graph.vertices), "matrix": M.tolist()}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    graph, m = load_graph(args.graph)
    _emit(graph_to_json(graph, m))
    return 0


def cmd_info(args) -> int:
    graph, m = _load(args.graph, args.measure)
    if args.matrix:
        L = laplacian_matrix(graph, m)
        _csv([""] + list(graph.vertices), ([v] + list(row) for v, row in zip(graph.vertices, L)))
        return 0
    bound = norm_bound_report(graph, m)
    _emit({
        "vertices": len(graph),
        "edges": len(graph.edges),
        "components": [list(c) for c in connected_components(graph)],
        "connected": is_connected(graph),
        "total_edge_weight": total_edge_weight(graph),
        "degree": dict(zip(graph.vertices, degrees(graph, m))),
        "sup_degree": bound.sup_degree,
        "operator_norm": bound.operator_norm,
        "recurrence": [{"vertices": list(c.vertices), "verdict": c.verdict.value}
                       for c in classify_finite(graph)],
    })
    return 0


def cmd_metric(args) -> int:
    graph, m = _load(args.graph, args.measure)
    if args.kind == "d":
        value = combinatorial_distance(graph, args.source, args.target)
    else:
        value = huang_metric(graph, m, args.source, args.target)
    _emit({"kind": args.kind, "from": args.source, "to": args.target, "distance": value})
    return 0


def cmd_heat(args) -> int:
    graph, m = _load(args.graph, args.measure)
    times = sorted(args.times) if args.times else [args.t]
    f = _vertex_function(graph, args.f) if args.f else None
    if f is None:
        if args.source is None:
            raise ValidationError("heat needs --f or --from")
        f = graph.indicator(args.source)
    traj = heat_trajectory(graph, m, f, times)
    if args.csv:
        _csv(["t"] + list(graph.vertices), ([t] + list(u) for t, u in zip(times, traj)))
    else:
        _emit([{"t": t, "u": dict(zip(graph.vertices, u))} for t, u in zip(times, traj)])
    return 0


def cmd_kernel(args) -> int:
    graph, m = _load(args.graph, args.measure)
    _emit({"t": args.t, **_matrix_payload(graph, heat_kernel_matrix(graph, m, args.t))})
    return 0


def cmd_green(args) -> int:
    graph, m = _load(args.graph, args.measure)
    pairs = [(args.source, args.target)] if args.source else \
        [(x, y) for x in graph.vertices for y in graph.vertices]
    if args.source and not args.target:
        raise ValidationError("--from and --to go together")
    _emit([{"x": x, "y": y, "green": green_function(graph, m, x, y)} for x, y in pairs])
    return 0


def cmd_markov(args) -> int:
    graph, _ = load_graph(args.graph)
    _emit(_matrix_payload(graph, markov_operator(graph)))
    return 0


def cmd_gst(args) -> int:
    graph, m = _load(args.graph, args.measure)
    h = _vertex_function(graph, args.h)
    tau = read_json(args.tau) if args.tau else None
    if tau is not None and not isinstance(tau, dict):
        raise ValidationError("--tau must be a JSON object mapping vertices to vertices")
    new, mh = ground_state_transform(graph, m, GstSpec(tuple(h), tau, args.beta))
    text = dumps(graph_to_json(new, mh)) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_superharmonic(args) -> int:
    graph, _ = load_graph(args.graph)
    h = find_positive_superharmonic(graph, require_nonconstant=args.nonconstant)
    _emit({"h": None if h is None else dict(zip(graph.vertices, h))})
    return 0


def cmd_counterexample(args) -> int:
    graph, m = _load(args.graph, args.measure)
    ce = counterexample_pair(graph, m, seed=args.seed)
    if ce is None:
        _emit({"recurrent": True, "pair": None})
        return 0
    _emit({
        "recurrent": False,
        "pair": graph_to_json(ce.graph, ce.measure),
        "h": dict(zip(graph.vertices, ce.h)),
        "certificate": ce.certificate.to_json(),
        "differences": ce.differences,
        "distinct": ce.distinct,
    })
    return 0


def cmd_reconstruct(args) -> int:
    g1, m1 = _load(args.graph1, args.measure)
    g2, m2 = _load(args.graph2, args.measure)
    certs = reconstruct(g1, m1, g2, m2, max_solutions=args.max_solutions, root=args.root,
                        tol=args.tol, seed=args.seed)
    _emit([c.to_json() for c in certs])
    return 0


def cmd_recurrence(args) -> int:
    graph, _ = load_graph(args.graph)
    out: dict = {"components": [{"vertices": list(c.vertices), "verdict": c.verdict.value}
                                for c in classify_finite(graph)]}
    if args.root is not None or args.subsets is not None:
        if args.root is None:
            raise ValidationError("--subsets needs --root")
        if args.subsets:
            subsets = read_json(args.subsets)
            if not isinstance(subsets, list) or not all(isinstance(s, list) for s in subsets):
                raise ValidationError("subsets JSON must be a list of vertex-id lists")
        else:
            # balls of radius 0 .. eccentricity - 1, so every subset leaves a boundary
            dist = combinatorial_distances(graph)[graph.position(args.root)]
            reach = int(dist[np.isfinite(dist)].max())
            subsets = balls(graph, args.root, range(max(reach, 1)))
        report = capacity_sequence(Exhaustion.build(graph, args.root, subsets))
        if args.csv:
            sys.stdout.write(report.to_csv())
            return 0
        out.update(root=args.root, caps=list(report.caps), sizes=list(report.sizes),
                   trend=report.verdict.value, fit=report.fit, csv=report.to_csv())
    _emit(out)
    return 0


def cmd_selftest(args) -> int:
    results = acceptance.run_all(seed=args.seed, only=args.only)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.number:>2}  {status}  {r.name:<{width}}  {r.seconds:6.2f}s  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} criteria passed")
    return 0 if failed == 0 else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--measure", choices=("uniform", "normalizing"), default="uniform",
                        help="measure used when the graph file carries none (default uniform)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized test vectors")
    common.add_argument("--tol", type=float, default=ACCEPT_TOL,
                        help="certificate acceptance threshold (default 1e-9)")

    parser = _Parser(prog="graphdiffusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("validate", cmd_validate, "check a graph file and echo it canonicalized")
    p.add_argument("graph")

    p = add("info", cmd_info, "summary statistics, or the Laplacian as CSV")
    p.add_argument("graph")
    p.add_argument("--matrix", action="store_true", help="print the Laplacian L as CSV")

    p = add("metric", cmd_metric, "combinatorial or Huang distance between two vertices")
    p.add_argument("graph")
    p.add_argument("--kind", choices=("d", "rho"), default="d")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)

    p = add("heat", cmd_heat, "heat semigroup applied to a function")
    p.add_argument("graph")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--times", type=float, nargs="+", help="several times; overrides --t")
    p.add_argument("--f", help="JSON file with the initial function")
    p.add_argument("--from", dest="source", help="start from the indicator of this vertex")
    p.add_argument("--csv", action="store_true", help="time series as CSV")

    p = add("kernel", cmd_kernel, "heat kernel matrix at time t")
    p.add_argument("graph")
    p.add_argument("--t", type=float, default=1.0)

    p = add("green", cmd_green, "Green function (all pairs, or one pair)")
    p.add_argument("graph")
    p.add_argument("--from", dest="source")
    p.add_argument("--to", dest="target")

    p = add("markov", cmd_markov, "transition matrix b/n")
    p.add_argument("graph")

    p = add("gst", cmd_gst, "ground state transform; writes the transformed graph JSON")
    p.add_argument("graph")
    p.add_argument("--h", required=True, help="JSON file with the positive superharmonic h")
    p.add_argument("--tau", help="JSON object mapping each vertex to its image")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--out", help="write here instead of stdout")

    p = add("superharmonic", cmd_superharmonic, "find a positive superharmonic function")
    p.add_argument("graph")
    p.add_argument("--nonconstant", action="store_true")

    p = add("counterexample", cmd_counterexample,
            "a different graph with order isomorphic diffusion, if one exists")
    p.add_argument("graph")

    p = add("reconstruct", cmd_reconstruct, "all intertwining order isomorphisms")
    p.add_argument("graph1")
    p.add_argument("graph2")
    p.add_argument("--root", help="vertex of graph2 where h is gauged to 1")
    p.add_argument("--max-solutions", type=int, default=16)

    p = add("recurrence", cmd_recurrence, "recurrence verdicts and capacity sequences")
    p.add_argument("graph")
    p.add_argument("--root")
    p.add_argument("--subsets", help="JSON list of nested vertex-id lists (default: balls)")
    p.add_argument("--csv", action="store_true", help="capacities as CSV")

    p = add("selftest", cmd_selftest, "run the acceptance criteria")
    p.add_argument("--only", type=int, nargs="+", choices=sorted(acceptance.CRITERIA))
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, GraphDiffusionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
