"""Command-line interface.

Exit codes: 0 on solver success, 64 for usage/input errors, and otherwise a
code mirroring the termination status: 11 primal-infeasibility suspicion,
12 dual-infeasibility suspicion, 21 lack of progress, 23 numerical failure,
26 iteration limit.
"""

from __future__ import annotations

import argparse
import json
import sys

from .ipm import SolverConfig, solve
from .modeling import model_from_json
from .npa import (
    Scenario,
    chsh_nv_game,
    chsh_nv_task,
    mlp_bound,
    nv_build_basis,
    nv_solve,
    qrac_nv_game,
    qrac_nv_task,
    solve_bell,
)
from .problem import (
    STATUS_ITERATION_LIMIT,
    STATUS_LACK_OF_PROGRESS,
    STATUS_NUMERICAL_FAILURE,
    STATUS_PRIMAL_INFEASIBLE,
    STATUS_DUAL_INFEASIBLE,
    STATUS_SUCCESS,
)
from .quantum import DensityMatrix, dps_test, qsd_optimal
from .graphs import lovasz_theta, parse_graph, weighted_theta
from .report import RunReport
from .sdpa import parse_sdpa
from .seesaw import chsh_seesaw, qrac_seesaw
from .sos import sos_certificate, tsirelson_sos_chsh

EXIT_USAGE = 64
_EXIT_BY_STATUS = {
    STATUS_SUCCESS: 0,
    STATUS_PRIMAL_INFEASIBLE: 11,
    STATUS_DUAL_INFEASIBLE: 12,
    STATUS_LACK_OF_PROGRESS: 21,
    STATUS_NUMERICAL_FAILURE: 23,
    STATUS_ITERATION_LIMIT: 26,
}


class UsageError(Exception):
    pass


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        tol_gap=args.tol,
        tol_primal=args.tol,
        tol_dual=args.tol,
        max_iterations=args.maxit,
        direction=args.direction,
    )


def _equality_mode(args) -> str:
    return {"split": "free_split", "eliminate": "eliminate", "ineq": "two_inequalities"}[args.equalities]


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _scenario_from_doc(doc) -> Scenario:
    try:
        return Scenario(tuple(doc["settings"]), tuple(tuple(o) for o in doc["outcomes"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad scenario document: {exc}") from exc


def _bell_from_doc(doc) -> dict:
    bell = {}
    for entry in doc.get("bell", []):
        bell[(entry["a"], entry["b"], entry["x"], entry["y"])] = float(entry["coeff"])
    if not bell:
        raise UsageError("scenario document has no 'bell' coefficients")
    return bell


# ---------------------------------------------------------------------------
# subcommand handlers; each returns a RunReport


def _cmd_solve(args) -> RunReport:
    text = _read(args.input)
    cfg = _solver_config(args)
    if args.input.endswith(".json"):
        model = model_from_json(text)
        compiled = model.compile(framing=args.framing, equality_mode=_equality_mode(args))
        res = compiled.solve(cfg)
        if args.verbose:
            print(res.log.to_text())
        return RunReport.from_solution(
            "solve", compiled.problem, res.solution, result={"model_value": res.value, "framing": args.framing}
        )
    p = parse_sdpa(text)
    sol, log = solve(p, cfg)
    if args.verbose:
        print(log.to_text())
    return RunReport.from_solution("solve", p, sol, result={"sdpa_objective": -sol.dual_value})


def _cmd_npa(args) -> RunReport:
    doc = json.loads(_read(args.scenario))
    scenario = _scenario_from_doc(doc)
    bell = _bell_from_doc(doc)
    level = args.level if args.level == "1+AB" else int(args.level)
    res = solve_bell(scenario, level, bell, cfg=_solver_config(args))
    if args.verbose:
        print(res.model_result.log.to_text())
    return RunReport.from_solution(
        "npa",
        res.model_result.compiled.problem,
        res.model_result.solution,
        result={"bound": res.value, "level": str(level), "moment_size": res.gamma.shape[0]},
    )


def _cmd_mlp(args) -> RunReport:
    doc = json.loads(_read(args.scenario))
    try:
        scenario = Scenario.prepare_measure(doc["preparations"], doc["meas_settings"], doc.get("outcomes", 2))
        d = int(doc["dim"])
        witness = {(e["b"], e["x"], e["y"]): float(e["coeff"]) for e in doc["witness"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad prepare-and-measure document: {exc}") from exc
    level = args.level if args.level == "1+AB" else int(args.level)
    res = mlp_bound(scenario, d, witness, level=level, cfg=_solver_config(args))
    if args.verbose:
        print(res.model_result.log.to_text())
    return RunReport.from_solution(
        "mlp",
        res.model_result.compiled.problem,
        res.model_result.solution,
        result={"bound": res.value, "dim": d, "level": str(level)},
    )


def _cmd_nv(args) -> RunReport:
    doc = json.loads(_read(args.scenario))
    kind = doc.get("kind")
    if kind == "qrac":
        task = qrac_nv_task(int(doc.get("bits", 2)), int(doc.get("dim", 2)))
        game = qrac_nv_game(task, int(doc.get("bits", 2)))
    elif kind == "chsh":
        task = chsh_nv_task(int(doc.get("dim_each", 2)))
        game = chsh_nv_game(task)
    else:
        raise UsageError("nv scenario document needs kind 'qrac' or 'chsh'")
    basis = nv_build_basis(task, seed=args.seed, max_draws=int(doc.get("max_draws", 800)))
    value, _, res = nv_solve(basis, game, cfg=_solver_config(args))
    if args.verbose:
        print(res.log.to_text())
    return RunReport.from_solution(
        "nv",
        res.compiled.problem,
        res.solution,
        seed=args.seed,
        result={"bound": value, "basis_size": len(basis), "kind": kind},
    )


def _cmd_theta(args) -> RunReport:
    g = parse_graph(_read(args.graph))
    cfg = _solver_config(args)
    if g.weights is not None:
        value, res = weighted_theta(g, cfg)
        payload = {"theta_weighted": value, "vertices": g.n, "edges": len(g.edges)}
    else:
        value, _, res = lovasz_theta(g, cfg)
        payload = {"theta": value, "vertices": g.n, "edges": len(g.edges)}
    if args.verbose:
        print(res.log.to_text())
    return RunReport.from_solution("theta", res.compiled.problem, res.solution, result=payload)


def _cmd_dps(args) -> RunReport:
    doc = json.loads(_read(args.state))
    rho = DensityMatrix.from_json_dict(doc)
    dims = (args.dims[0], args.dims[1])
    res = dps_test(rho, dims, k=args.copies, ppt=not args.no_ppt, cfg=_solver_config(args))
    mr = res.model_result
    if args.verbose:
        print(mr.log.to_text())
    return RunReport.from_solution(
        "dps",
        mr.compiled.problem,
        mr.solution,
        result={"feasible": res.feasible, "slack": res.slack, "copies": args.copies, "ppt": not args.no_ppt},
    )


def _cmd_qsd(args) -> RunReport:
    doc = json.loads(_read(args.states))
    try:
        states = [DensityMatrix.from_json_dict(d) for d in doc["states"]]
        priors = doc.get("priors")
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad states document: {exc}") from exc
    value, _, res = qsd_optimal(states, priors, cfg=_solver_config(args))
    if args.verbose:
        print(res.log.to_text())
    return RunReport.from_solution(
        "qsd", res.compiled.problem, res.solution, result={"success_probability": value, "n_states": len(states)}
    )


def _cmd_seesaw(args) -> RunReport:
    cfg = _solver_config(args)
    if args.task == "chsh":
        out = chsh_seesaw(restarts=args.restarts, seed=args.seed, cfg=cfg)
    elif args.task == "qrac":
        out = qrac_seesaw(n_bits=args.bits, d=args.dim, restarts=args.restarts, seed=args.seed, cfg=cfg)
    else:
        raise UsageError("seesaw task must be 'chsh' or 'qrac'")
    return RunReport(
        command="seesaw",
        status=STATUS_SUCCESS,
        status_label="success",
        block_sizes=[],
        m=0,
        nonneg_dim=0,
        free_dim=0,
        primal_value=out.value,
        dual_value=out.value,
        gap=0.0,
        primal_residual=0.0,
        dual_residual=0.0,
        iterations=len(out.trajectory) - 1,
        wall_time=0.0,
        dimacs=[0.0] * 6,
        seed=args.seed,
        result={
            "lower_bound": out.value,
            "task": args.task,
            "restarts": args.restarts,
            "restart_values": list(out.restart_values),
        },
    )


def _cmd_sos(args) -> RunReport:
    cfg = _solver_config(args)
    if args.chsh:
        q1, report = tsirelson_sos_chsh(cfg)
        res = report["result"]
        return RunReport.from_solution(
            "sos",
            res.compiled.problem,
            res.solution,
            result={"q1": q1, "residual": report["residual"], "kind": "chsh"},
        )
    if not args.poly:
        raise UsageError("sos needs --poly FILE or --chsh")
    doc = json.loads(_read(args.poly))
    try:
        n_vars = int(doc["vars"])
        h = {tuple(int(e) for e in t["exponents"]): float(t["coeff"]) for t in doc["terms"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad polynomial document: {exc}") from exc
    res = sos_certificate(h, n_vars, cfg=cfg)
    mr = res.model_result
    payload = {"feasible": res.feasible, "margin": res.margin}
    if res.certificate is not None:
        payload["residual"] = res.certificate.residual
        payload["n_squares"] = len(res.certificate.squares)
    return RunReport.from_solution("sos", mr.compiled.problem, mr.solution, result=payload)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsdp", description="SDP toolkit for quantum information")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-7, help="gap and residual tolerance")
        p.add_argument("--maxit", type=int, default=100, help="iteration limit")
        p.add_argument("--direction", choices=("hkm", "nt"), default="hkm")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json-out", default=None, help="write the report as JSON ('-' for stdout)")
        p.add_argument("--verbose", action="store_true", help="print the per-iteration table")

    p = sub.add_parser("solve", help="solve an SDPA sparse file or a model JSON file")
    p.add_argument("input")
    p.add_argument("--framing", choices=("dual", "primal"), default="dual")
    p.add_argument("--equalities", choices=("split", "eliminate", "ineq"), default="split")
    common(p)
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("npa", help="Bell-functional bound from the moment-matrix hierarchy")
    p.add_argument("--scenario", required=True)
    p.add_argument("--level", default="1")
    common(p)
    p.set_defaults(handler=_cmd_npa)

    p = sub.add_parser("mlp", help="dimension-constrained prepare-and-measure bound")
    p.add_argument("--scenario", required=True)
    p.add_argument("--level", default="2")
    common(p)
    p.set_defaults(handler=_cmd_mlp)

    p = sub.add_parser("nv", help="randomized fixed-dimension moment-matrix bound")
    p.add_argument("--scenario", required=True)
    common(p)
    p.set_defaults(handler=_cmd_nv)

    p = sub.add_parser("theta", help="Lovasz theta of a graph (weighted when weights present)")
    p.add_argument("--graph", required=True)
    common(p)
    p.set_defaults(handler=_cmd_theta)

    p = sub.add_parser("dps", help="PPT symmetric-extension separability test")
    p.add_argument("--state", required=True)
    p.add_argument("--dims", type=int, nargs=2, required=True)
    p.add_argument("--copies", type=int, default=2)
    p.add_argument("--no-ppt", action="store_true")
    common(p)
    p.set_defaults(handler=_cmd_dps)

    p = sub.add_parser("qsd", help="optimal quantum state discrimination")
    p.add_argument("--states", required=True)
    common(p)
    p.set_defaults(handler=_cmd_qsd)

    p = sub.add_parser("seesaw", help="alternating lower bounds (chsh or qrac)")
    p.add_argument("--task", default="chsh")
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--bits", type=int, default=2)
    p.add_argument("--dim", type=int, default=2)
    common(p)
    p.set_defaults(handler=_cmd_seesaw)

    p = sub.add_parser("sos", help="sum-of-squares certificates")
    p.add_argument("--poly", default=None)
    p.add_argument("--chsh", action="store_true")
    common(p)
    p.set_defaults(handler=_cmd_sos)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        report = args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, RuntimeError, MemoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    print(report.to_text())
    if args.json_out:
        text = report.to_json()
        if args.json_out == "-":
            print(text)
        else:
            with open(args.json_out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
    return _EXIT_BY_STATUS.get(report.status, 23)


if __name__ == "__main__":
    sys.exit(main())
