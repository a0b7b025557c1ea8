"""Command-line interface: simulate, sweep, verify, mms.

Exit codes: 0 success, 1 classified run/check failure (washout, divergence,
invariant or order violation), 2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor

from .boundary import detachment_rhs
from .config import build_runspec, load_tree
from .coupler import dissipation_envelope_check, energy, run_simulation
from .errors import EnvelopeViolation, SolverError
from .mms import ORDER_FLOORS, mms_study
from .output import write_timeseries
from .problem import validate_problem

_INT_PARAMS = {"N", "picard_max_iter", "stride"}
_EQUILIBRIUM_RHS_TOL = 1e-8
_EQUILIBRIUM_REL_TOL = 1e-6


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biofilmfront",
        description="Front-fixed solver for 1D biofilm growth with substrate "
                    "diffusion and surface detachment.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one configuration and write outputs")
    sim.add_argument("--config", required=True, help="YAML run configuration")
    sim.add_argument("--out", help="output directory (overrides the config)")
    sim.add_argument("--dt", type=float, help="override solver.dt")
    sim.add_argument("--grid-n", type=int, help="override solver.N")

    swp = sub.add_parser("sweep", help="run a parameter sweep of whole simulations")
    swp.add_argument("--config", required=True)
    swp.add_argument("--param", required=True,
                     help="parameter name (e.g. lambda, R0, dt) or dotted path")
    swp.add_argument("--values", required=True, help="comma-separated values")
    swp.add_argument("--jobs", type=int, default=1, help="concurrent runs (default 1)")
    swp.add_argument("--out", default="sweep_out", help="base output directory")

    ver = sub.add_parser("verify", help="run a config and audit the invariant suite")
    ver.add_argument("--config", required=True)

    sub.add_parser("mms", help="run the manufactured-solution convergence study")
    return parser


def _set_param(tree: dict, name: str, value) -> None:
    if "." in name:
        keys = name.split(".")
        node = tree
        for key in keys[:-1]:
            if not isinstance(node, dict) or key not in node:
                raise SolverError(f"unknown sweep parameter path {name!r}", code="UNKNOWN_KEY")
            node = node[key]
        node[keys[-1]] = value
        return
    if name in ("lambda", "R0"):
        tree.setdefault("problem", {})[name] = value
    else:
        tree.setdefault("solver", {})[name] = value


def _parse_value(param: str, text: str):
    leaf = param.rsplit(".", 1)[-1]
    if leaf in _INT_PARAMS or re.fullmatch(r"[+-]?\d+", text):
        try:
            return int(text)
        except ValueError:
            pass
    try:
        return float(text)
    except ValueError:
        raise SolverError(f"cannot parse sweep value {text!r} as a number",
                          code="SCHEMA_VIOLATION") from None


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _run_tree(tree: dict):
    """Build, validate and run one configuration tree."""
    spec = build_runspec(tree)
    report = validate_problem(spec.data, spec.kin)
    if not report.ok:
        raise SolverError(
            "invalid problem data: "
            + "; ".join(f"{code}: {msg}" for code, msg in report.violations),
            code=report.violations[0][0],
        )
    traj = run_simulation(spec.data, spec.kin, spec.cfg, spec.t_end,
                          snapshot_stride=spec.stride, validate=False)
    return spec, traj


def _cmd_simulate(args) -> int:
    tree = load_tree(args.config)
    if args.dt is not None:
        _set_param(tree, "dt", args.dt)
    if args.grid_n is not None:
        _set_param(tree, "N", args.grid_n)
    spec, traj = _run_tree(tree)
    target = args.out or spec.out_dir or "out"
    write_timeseries(traj, target, config_hash=spec.config_hash, formats=spec.formats)
    final = traj.final_state
    print(f"outcome: {traj.outcome}")
    print(f"steps: {len(traj.reports)}  t: {final.t:.6g}  R: {final.R:.9g}  "
          f"v1: {final.v1:.9g}")
    print(f"outputs: {target}")
    return 0 if traj.outcome == "completed" else 1


def _sweep_worker(payload: str):
    job = json.loads(payload)
    tree = job["tree"]
    _set_param(tree, job["param"], job["value"])
    spec, traj = _run_tree(tree)
    write_timeseries(traj, job["out_dir"], config_hash=spec.config_hash,
                     formats=spec.formats)
    final = traj.final_state
    mu, nu = spec.cfg.weights(spec.kin.n, spec.kin.m)
    return {
        "value_text": job["value_text"],
        "outcome": traj.outcome,
        "final_R": final.R,
        "final_energy": energy(final, mu, nu),
        "steps": len(traj.reports),
    }


def _cmd_sweep(args) -> int:
    tree = load_tree(args.config)
    value_texts = [v.strip() for v in args.values.split(",") if v.strip()]
    if not value_texts:
        print("error: --values is empty", file=sys.stderr)
        return 2
    jobs = []
    for text in value_texts:
        value = _parse_value(args.param, text)
        jobs.append(json.dumps({
            "tree": copy.deepcopy(tree),
            "param": args.param,
            "value": value,
            "value_text": text,
            "out_dir": f"{args.out}/{args.param}={text}",
        }))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(j) for j in jobs]

    os.makedirs(args.out, exist_ok=True)
    summary = os.path.join(args.out, "sweep_summary.csv")
    with open(summary, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{args.param},outcome,final_R,final_energy,steps\n")
        for row in rows:
            fh.write(",".join([
                row["value_text"], row["outcome"], _fmt(row["final_R"]),
                _fmt(row["final_energy"]), str(row["steps"]),
            ]) + "\n")
    for row in rows:
        print(f"{args.param}={row['value_text']}: {row['outcome']} "
              f"(final_R={row['final_R']:.6g}, steps={row['steps']})")
    print(f"summary: {summary}")
    return 0 if all(r["outcome"] == "completed" for r in rows) else 1


def _cmd_verify(args) -> int:
    tree = load_tree(args.config)
    spec = build_runspec(tree)
    failures = []

    report = validate_problem(spec.data, spec.kin)
    for code, msg in report.warnings:
        print(f"warning [{code}]: {msg}")
    if report.ok:
        print("problem validation: ok")
    else:
        for code, msg in report.violations:
            print(f"problem validation: FAIL [{code}] {msg}")
        failures.append("validation")
        print("verify: FAIL")
        return 1

    try:
        traj = run_simulation(spec.data, spec.kin, spec.cfg, spec.t_end,
                              snapshot_stride=spec.stride, validate=False)
    except SolverError as exc:
        print(f"run: FAIL [{exc.code}] {exc}")
        print("verify: FAIL")
        return 1

    if traj.outcome in ("completed", "washout"):
        print(f"run outcome: {traj.outcome} ({len(traj.reports)} steps)")
    else:
        print(f"run outcome: FAIL ({traj.outcome})")
        failures.append("outcome")

    neg_flags = {"NEGATIVE_Y", "NEGATIVE_C"}
    hit = {f for r in traj.reports for f in r.invariant_flags}
    if hit & neg_flags:
        print(f"positivity: FAIL (flags {sorted(hit & neg_flags)}, "
              f"min Y={traj.min_Y_seen:.3e}, min C={traj.min_C_seen:.3e})")
        failures.append("positivity")
    else:
        print(f"positivity: ok (min Y={traj.min_Y_seen:.3e}, min C={traj.min_C_seen:.3e})")

    if "R_BOUND_EXCEEDED" in hit:
        print("thickness bound: FAIL (R exceeded its a priori bound)")
        failures.append("thickness bound")
    else:
        print(f"thickness bound: ok (max R={max(traj.thickness_series()):.6g})")

    if spec.verify is not None:
        try:
            env = dissipation_envelope_check(
                traj, alpha=spec.verify["alpha"], beta=spec.verify["beta"],
                M0=spec.verify["M0"], tol=spec.verify["tol"],
                include_boundary=spec.verify["include_boundary"])
            print(f"energy envelope: ok (gamma={env.gamma:.6g}, "
                  f"min margin={env.margins.min():.3e})")
        except EnvelopeViolation as exc:
            print(f"energy envelope: FAIL at t={exc.time:.6g} (excess {exc.excess:.3e})")
            failures.append("energy envelope")
    else:
        print("energy envelope: skipped (no verify block)")

    final = traj.final_state
    rhs = detachment_rhs(final.R, final.v1, spec.data.lam)
    if abs(rhs) < _EQUILIBRIUM_RHS_TOL:
        gap = abs(final.v1 - spec.data.lam * final.R**2)
        if gap < _EQUILIBRIUM_REL_TOL * max(1.0, final.v1):
            print(f"equilibrium residual: ok (|v1 - lambda R^2|={gap:.3e})")
        else:
            print(f"equilibrium residual: FAIL (|v1 - lambda R^2|={gap:.3e})")
            failures.append("equilibrium")
    else:
        print(f"equilibrium residual: skipped (|dR/dt|={abs(rhs):.3e}, not at equilibrium)")

    print("verify: " + ("PASS" if not failures else "FAIL (" + ", ".join(failures) + ")"))
    return 0 if not failures else 1


def _cmd_mms(_args) -> int:
    report = mms_study(raise_on_regression=False)
    for name, case in report.cases.items():
        status = "ok" if case.ok else "FAIL"
        errs = ", ".join(f"{e:.3e}" for e in case.errors)
        print(f"{name}: order={case.observed_order:.2f} floor={case.floor} "
              f"[{status}] errors=[{errs}]")
    print("convergence study: " + ("PASS" if report.ok else "FAIL"))
    return 0 if report.ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_mms(args)
    except SolverError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        if exc.code in ("PARSE_ERROR", "UNKNOWN_KEY", "SCHEMA_VIOLATION",
                        "DIMENSION_MISMATCH", "NONPOSITIVE_PARAM", "TOO_COARSE",
                        "NONPOSITIVE_D", "NONPOSITIVE_LAMBDA", "NONPOSITIVE_R0",
                        "COMPAT_MISMATCH", "NONFINITE_INPUT"):
            return 2
        return 1


if __name__ == "__main__":
    sys.exit(main())
