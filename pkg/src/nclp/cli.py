"""Command line entry point: ``nclp <command> ...``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import io
from .dilation import convex_n_dilation, dilation_report, shift_dilation
from .errors import NCLpError
from .gallery import builtin_cases, run_case
from .lamperti import LampertiDecomposition, LampertiWitness, decompose
from .maximal import SolverOptions, maximal_ergodic_report, maximal_norm_pos


def _read_input(path: str) -> dict:
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _emit(rep: dict, path: str | None):
    text = io.dumps(rep)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _run_named(args):
    name, tol, seed = args
    case = builtin_cases()[name]()
    return run_case(case, tol=tol, seed=seed)


def cmd_gallery(ns) -> int:
    names = list(builtin_cases())
    if ns.action == "list":
        print(io.dumps(io.report("gallery_list", {"cases": names})))
        return 0
    wanted = names if ns.name == "all" else [ns.name]
    for n in wanted:
        if n not in names:
            print(f"unknown case {n!r}; known: {', '.join(names)}", file=sys.stderr)
            return 2
    jobs = [(n, ns.tol, ns.seed) for n in wanted]
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as ex:
            results = list(ex.map(_run_named, jobs))
    else:
        results = [_run_named(j) for j in jobs]
    passed = all(r["passed"] for r in results)
    _emit(io.report("gallery_run", {"passed": passed, "results": results}), ns.json)
    return 0 if passed else 1


def cmd_analyze(ns) -> int:
    data = _read_input(ns.input)
    T = io.operator_from_dict(data.get("operator", data))
    p = float(data.get("p", ns.p))
    d = decompose(T, p, ns.tol, ns.seed)
    payload = {"status": d.status}
    if isinstance(d, LampertiDecomposition):
        payload.update({"classification": d.classification, "residuals": d.residuals,
                        "decomposition": {"w": d.w, "b": d.b, "J": io.matrix_to_json(d.J.matrix)},
                        "trace_bound": d.trace_bound, "range_is_corner": d.range_is_corner})
    elif isinstance(d, LampertiWitness):
        payload.update({"witness": {"e": d.e, "f": d.f, "violation": d.violation},
                        "residuals": d.residuals})
    else:
        payload.update({"reason": d.reason, "best_violation": d.best_violation})
    _emit(io.report("analyze", payload), ns.json)
    return 0 if d.status != "indeterminate" else 1


def cmd_dilate(ns) -> int:
    data = _read_input(ns.input)
    M = io.algebra_from_dict(data["algebra"]) if "algebra" in data else None
    ops = [io.operator_from_dict(o, M) for o in data["operators"]]
    p = float(data.get("p", ns.p))
    if data.get("kind", "tensor") == "shift":
        system = shift_dilation(ops, p, ns.tol)
    else:
        lam = data.get("lambda", [1.0 / len(ops)] * len(ops))
        system = convex_n_dilation(lam, ops, int(data.get("N", 2)), p, ns.tol,
                                   lift=bool(data.get("lift", True)))
    rep = dilation_report(system, seed=ns.seed)
    worst = max(rep.get("residuals", [0.0]) + [rep["isometry_deviation"]])
    rep["passed"] = bool(worst <= max(ns.tol, 1e-8))
    _emit(io.report("dilate", rep), ns.json)
    return 0 if rep["passed"] else 1


def _solver_opts(ns, data: dict) -> SolverOptions:
    extra = data.get("solver", {})
    return SolverOptions(method=extra.get("method", "barrier"), max_iter=ns.max_iter,
                         seed=ns.seed, dual_polish=bool(extra.get("dual_polish", False)))


def cmd_maxnorm(ns) -> int:
    data = _read_input(ns.input)
    M = io.algebra_from_dict(data["algebra"])
    xs = [io.element_from_json(M, x) for x in data["elements"]]
    p = float(data.get("p", ns.p))
    res = maximal_norm_pos(M, xs, p, _solver_opts(ns, data))
    _emit(io.report("maxnorm", res.to_dict()), ns.json)
    return 0 if res.converged else 1


def cmd_ergodic(ns) -> int:
    data = _read_input(ns.input)
    T = io.operator_from_dict(data["operator"])
    x = io.element_from_json(T.parent, data["x"])
    p = float(data.get("p", ns.p))
    rep = maximal_ergodic_report(T, x, int(data.get("N", 16)), p,
                                 two_sided=bool(data.get("two_sided", False)),
                                 opts=_solver_opts(ns, data))
    payload = rep.to_dict()
    gaps = [u - l for l, u in rep.profile]
    payload["passed"] = bool(np.isfinite(rep.ratio) and max(gaps) <= 1e-4 * max(1.0, rep.ratio))
    _emit(io.report("ergodic", payload), ns.json)
    return 0 if payload["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nclp", description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-iter", type=int, default=10_000)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gallery", help="list or run built-in cases")
    gs = g.add_subparsers(dest="action", required=True)
    gs.add_parser("list")
    run = gs.add_parser("run")
    run.add_argument("name", help="case name, or 'all'")
    run.add_argument("--json", help="also write the report here")
    run.add_argument("--jobs", type=int, default=1)
    g.set_defaults(func=cmd_gallery)

    for name, func, helptext in [
        ("analyze", cmd_analyze, "Lamperti certificate or witness for an operator"),
        ("dilate", cmd_dilate, "build and verify a dilation"),
        ("maxnorm", cmd_maxnorm, "maximal norm of positive elements"),
        ("ergodic", cmd_ergodic, "maximal ergodic report"),
    ]:
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("input", help="JSON input file, or - for stdin")
        sp.add_argument("--p", type=float, default=2.0)
        sp.add_argument("--json", help="also write the report here")
        sp.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (NCLpError, KeyError, ValueError, json.JSONDecodeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
