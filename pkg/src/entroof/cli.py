"""Command-line surface: measure, roof, sweep, locc.

Every command writes one JSON report to stdout. The report has two
top-level sections: ``deterministic`` (command echo, input digests, fully
materialized configuration including the seed, and results) and
``timings``. Identical inputs and seed reproduce the deterministic section
byte for byte; timings are excluded from that guarantee. ``--out PATH``
duplicates the report to a file.

Exit codes: 0 success, 2 malformed input file, 3 invalid parameters,
4 internal consistency failure, 5 invalid LOCC tree.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import io as fileio
from .linalg import schmidt
from .locc import audit_monotonicity, validate_tree
from .measures import (
    CONCURRENCE,
    ENTANGLEMENT_NUMBER,
    ENTROPY,
    GEOMETRIC,
    NEGATIVITY,
    P_NUMBER,
    MeasureSpec,
    measure_value,
)
from .roof import RoofProblem, solve_roof
from .states import DensityOperator, InvariantViolation, PureState

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_BAD_PARAMS = 3
EXIT_INTERNAL = 4
EXIT_BAD_TREE = 5

RECONSTRUCTION_LIMIT = 1e-8

MEASURE_NAMES = {
    "e": ENTANGLEMENT_NUMBER,
    "entanglement-number": ENTANGLEMENT_NUMBER,
    "p-number": P_NUMBER,
    "entropy": ENTROPY,
    "negativity": NEGATIVITY,
    "concurrence": CONCURRENCE,
    "geometric": GEOMETRIC,
}


class ParamError(ValueError):
    pass


def _spec_from_args(args) -> MeasureSpec:
    kind = MEASURE_NAMES.get(args.measure)
    if kind is None:
        raise ParamError(
            f"unknown measure {args.measure!r}; choose from {sorted(MEASURE_NAMES)}")
    kwargs = {}
    if kind == P_NUMBER:
        if args.p is None:
            raise ParamError("p-number requires --p")
        kwargs["p"] = args.p
    if kind == CONCURRENCE:
        if args.k is None:
            raise ParamError("concurrence requires --k")
        kwargs["k"] = args.k
    if kind == GEOMETRIC:
        if args.ranks is None:
            raise ParamError("geometric requires --ranks K1,K2")
        try:
            parts = tuple(int(x) for x in args.ranks.split(","))
        except ValueError:
            raise ParamError(f"--ranks must be two integers, got {args.ranks!r}") from None
        kwargs["ranks"] = parts
    if kind == ENTROPY:
        kwargs["log_base"] = 2.0 if args.log_base == "2" else math.e
    try:
        return MeasureSpec(kind, **kwargs)
    except ValueError as e:
        raise ParamError(str(e)) from None


def _spec_config(spec: MeasureSpec) -> dict:
    return {
        "kind": spec.kind,
        "p": spec.p,
        "k": spec.k,
        "ranks": list(spec.ranks) if spec.ranks else None,
        "log_base": "e" if spec.log_base == math.e else "2",
    }


def _roof_config(args, resolved_m: int) -> dict:
    # workers is reported with the timings: it changes execution, not results
    return {
        "ensemble_size": resolved_m,
        "restarts": args.restarts,
        "max_iters": 2000,
        "tol": args.tol,
        "seed": args.seed,
        "direction": args.direction,
    }


def _roof_kwargs(args) -> dict:
    return {
        "ensemble_size": args.m,
        "restarts": args.restarts,
        "tol": args.tol,
        "seed": args.seed,
        "direction": "minimize" if args.direction == "min" else "maximize",
    }


def _ensemble_doc(ensemble) -> dict:
    return {
        "weights": [float(w) for w in ensemble.weights],
        "states": [fileio.vector_to_pairs(s.amplitudes) for s in ensemble.states],
    }


def _input_doc(path) -> dict:
    return {"path": str(path), "sha256": fileio.sha256_file(path)}


def _emit(report: dict, out_path) -> None:
    text = json.dumps(report, sort_keys=True, indent=2)
    print(text)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _require_pure(state) -> PureState:
    if not isinstance(state, PureState):
        raise ParamError("this command requires a pure-state file (kind = 'pure')")
    return state


def _require_density(state) -> DensityOperator:
    if not isinstance(state, DensityOperator):
        raise ParamError("this command requires a density file (kind = 'density')")
    return state


def cmd_measure(args) -> tuple[int, dict]:
    psi = _require_pure(fileio.load_state(args.state))
    spec = _spec_from_args(args)
    dec = schmidt(psi)
    value = measure_value(spec, psi)
    det = {
        "command": "measure",
        "inputs": {"state": _input_doc(args.state)},
        "config": {"measure": _spec_config(spec)},
        "results": {
            "value": value,
            "lambdas": [float(x) for x in dec.lambdas],
        },
    }
    return EXIT_OK, det


def cmd_roof(args) -> tuple[int, dict]:
    rho = _require_density(fileio.load_state(args.state))
    spec = _spec_from_args(args)
    try:
        problem = RoofProblem(rho=rho, measure=spec, **_roof_kwargs(args))
        result = solve_roof(problem, workers=args.workers)
    except ValueError as e:
        raise ParamError(str(e)) from None
    residual = result.ensemble.reconstruction_error(rho)
    det = {
        "command": "roof",
        "inputs": {"state": _input_doc(args.state)},
        "config": {
            "measure": _spec_config(spec),
            "roof": _roof_config(args, _resolve_m(args, rho)),
        },
        "results": {
            "value": result.value,
            "ensemble": _ensemble_doc(result.ensemble),
            "reconstruction_residual": residual,
            "objective_trace": list(result.objective_trace),
            "gap_estimate": result.gap_estimate,
            "converged": result.converged,
            "restart_values": list(result.restart_values),
        },
    }
    code = EXIT_OK if residual <= RECONSTRUCTION_LIMIT else EXIT_INTERNAL
    return code, det


def _resolve_m(args, rho: DensityOperator) -> int:
    from .roof import rank_of

    return args.m if args.m is not None else rank_of(rho) ** 2


def _parse_grid(text: str) -> list[float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ParamError(f"--p-grid must be START:STOP:STEP, got {text!r}") from None
    if start <= 1.0:
        raise ParamError(f"p-grid must lie inside (1, inf); start = {start}")
    if step <= 0 or stop < start:
        raise ParamError(f"bad grid {text!r}: need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def cmd_sweep(args) -> tuple[int, dict]:
    state = fileio.load_state(args.state)
    grid = _parse_grid(args.p_grid)
    rows = []
    if isinstance(state, PureState):
        from .measures import p_number_pure

        for p in grid:
            rows.append({"p": p, "value": p_number_pure(state, p), "gap_estimate": 0.0})
        mode = "pure"
    else:
        for p in grid:
            problem = RoofProblem(
                rho=state, measure=MeasureSpec(P_NUMBER, p=p), **_roof_kwargs(args))
            result = solve_roof(problem, workers=args.workers)
            rows.append({"p": p, "value": result.value, "gap_estimate": result.gap_estimate})
        mode = "roof"
    csv = "p,value\n" + "\n".join(f"{r['p']!r},{r['value']!r}" for r in rows)
    det = {
        "command": "sweep",
        "inputs": {"state": _input_doc(args.state)},
        "config": {
            "p_grid": args.p_grid,
            "mode": mode,
            "roof": _roof_config(args, _resolve_m(args, state)) if mode == "roof" else None,
        },
        "results": {"rows": rows, "csv": csv},
    }
    return EXIT_OK, det


def cmd_locc(args) -> tuple[int, dict]:
    tree, tree_dims = fileio.load_tree(args.tree)
    state = fileio.load_state(args.state)
    rho = state if isinstance(state, DensityOperator) else DensityOperator.from_pure(state)
    if rho.dims.as_tuple() != tree_dims.as_tuple():
        raise ParamError(
            f"tree dims {tree_dims.as_tuple()} do not match state dims {rho.dims.as_tuple()}")
    spec = _spec_from_args(args)
    report = validate_tree(tree, tree_dims)
    validation = [
        {"path": list(i.path), "code": i.code, "message": i.message, "residual": i.residual}
        for i in report.issues
    ]
    det = {
        "command": "locc",
        "inputs": {"tree": _input_doc(args.tree), "state": _input_doc(args.state)},
        "config": {
            "measure": _spec_config(spec),
            "roof": _roof_config(args, _resolve_m(args, rho)),
        },
        "results": {"validation": validation},
    }
    if not report.ok:
        return EXIT_BAD_TREE, det

    roof_opts = {
        "ensemble_size": args.m,
        "restarts": args.restarts,
        "tol": args.tol,
        "seed": args.seed,
    }
    audit = audit_monotonicity(tree, rho, spec, roof_opts)
    det["results"].update({
        "branches": [
            {
                "path": list(n.path),
                "party": n.party,
                "probability": n.probability,
                "value": n.value,
                "method": n.method,
                "gap_estimate": n.gap,
            }
            for n in audit.nodes
        ],
        "inequalities": [
            {
                "path": list(q.path),
                "parent_value": q.parent_value,
                "children_average": q.children_average,
                "slack": q.slack,
                "gap_budget": q.gap_budget,
                "flagged": q.flagged,
            }
            for q in audit.inequalities
        ],
        "end_to_end": {
            "input_value": audit.end_to_end.input_value,
            "input_gap": audit.end_to_end.input_gap,
            "output_value": audit.end_to_end.output_value,
            "output_gap": audit.end_to_end.output_gap,
            "slack": audit.end_to_end.slack,
            "flagged": audit.end_to_end.flagged,
        },
        "pruned": [list(p) for p in audit.pruned],
    })
    return EXIT_OK, det


def _add_measure_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--measure", required=True,
                   help="one of: e, p-number, entropy, negativity, concurrence, geometric")
    p.add_argument("--p", type=float, default=None, help="order for p-number (p > 1)")
    p.add_argument("--k", type=int, default=None, help="order for concurrence (1 <= k <= d)")
    p.add_argument("--ranks", default=None, help="projector ranks K1,K2 for geometric")
    p.add_argument("--log-base", choices=["2", "e"], default="2",
                   help="entropy logarithm base (default 2)")


def _add_roof_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=None,
                   help="ensemble size (default rank(rho)^2)")
    p.add_argument("--restarts", type=int, default=32, help="random restarts (default 32)")
    p.add_argument("--seed", type=int, default=0, help="optimizer seed (default 0)")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="stopping tolerance over a 20-iteration window (default 1e-9)")
    p.add_argument("--direction", choices=["min", "max"], default="min",
                   help="convex (min) or concave (max) roof (default min)")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for parallel restarts; results are identical (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entroof",
        description="Bipartite entanglement measures, convex roofs, and LOCC audits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_measure = sub.add_parser("measure", help="evaluate a pure-state measure")
    p_measure.add_argument("state", help="pure state file (JSON)")
    _add_measure_flags(p_measure)
    p_measure.add_argument("--out", default=None, help="duplicate the report to a file")
    p_measure.set_defaults(func=cmd_measure)

    p_roof = sub.add_parser("roof", help="roof-extend a measure to a density operator")
    p_roof.add_argument("state", help="density file (JSON)")
    _add_measure_flags(p_roof)
    _add_roof_flags(p_roof)
    p_roof.add_argument("--out", default=None, help="duplicate the report to a file")
    p_roof.set_defaults(func=cmd_roof)

    p_sweep = sub.add_parser("sweep", help="p-number values over a grid of p")
    p_sweep.add_argument("state", help="pure or density file (JSON)")
    p_sweep.add_argument("--measure", default="p-number", choices=["p-number"],
                         help="swept measure (p-number)")
    p_sweep.add_argument("--p-grid", required=True, help="grid START:STOP:STEP with start > 1")
    _add_roof_flags(p_sweep)
    p_sweep.add_argument("--out", default=None, help="duplicate the report to a file")
    p_sweep.set_defaults(func=cmd_sweep)

    p_locc = sub.add_parser("locc", help="run and audit an LOCC instrument tree")
    p_locc.add_argument("tree", help="tree file (JSON)")
    p_locc.add_argument("state", help="pure or density file (JSON)")
    _add_measure_flags(p_locc)
    _add_roof_flags(p_locc)
    p_locc.add_argument("--out", default=None, help="duplicate the report to a file")
    p_locc.set_defaults(func=cmd_locc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_BAD_PARAMS
    start = time.perf_counter()
    try:
        code, det = args.func(args)
    except InvariantViolation as e:
        print(f"error: invariant '{e.invariant}' violated "
              f"(residual {e.residual!r}): {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except ParamError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    timings = {"wall_seconds": time.perf_counter() - start}
    if getattr(args, "workers", None) is not None:
        timings["workers"] = args.workers
    report = {"deterministic": det, "timings": timings}
    _emit(report, args.out)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
