"""Command-line interface.

Subcommands: ``steady`` and ``evolve`` solve the config's base point,
``sweep`` runs a grid, ``effective`` prints the dark-state mapping,
``analytic`` the closed-form occupations over a beta grid, ``validate``
checks a config without solving.  Exit codes: 0 success, 1 usage or
config error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .analytic import (
    SingularReducedSystemError,
    closed_form_n1,
    lamb_dicke_limit_n1,
    ratio_limit,
)
from .core import expectation, phonon_number
from .darkstate import effective_params, validity_report
from .dynamics import (
    ConvergenceError,
    DegenerateSteadyStateError,
    IntegrationError,
    cooling_ratio,
    default_time_grid,
    evolve,
    steady_state,
    thermal_state,
)
from .model import liouvillian, space_for
from .sweeps import (
    ConfigError,
    SolverOptions,
    emit_outputs,
    parse_config,
    resolve_point,
    run_sweep,
    scenario_spec,
)

SOLVER_ERRORS = (DegenerateSteadyStateError, ConvergenceError,
                 IntegrationError, SingularReducedSystemError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralcool",
        description="Dark-state cooling with nonreciprocal couplings: "
                    "steady states, dynamics, sweeps and closed forms.")
    parser.add_argument("--version", action="version",
                        version=f"chiralcool {__version__}")
    sub = parser.add_subparsers(dest="command")
    for name, text in [
            ("steady", "solve the steady state of the config's base point"),
            ("evolve", "propagate the base point from a thermal state"),
            ("sweep", "run a parameter sweep and write CSV/JSON outputs"),
            ("effective", "print the dark-state mapping and its validity"),
            ("analytic", "print closed-form occupations over a beta grid"),
            ("validate", "check a config file without running")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="path to a config file")
        p.add_argument("--scenario", help="scenario preset name")
        p.add_argument("--out", help="output path prefix")
        p.add_argument("--threads", type=int, help="worker processes")
        p.add_argument("--nmax", type=int, help="phonon cutoff override")
        p.add_argument("--method", choices=["null-space", "long-time"],
                       help="steady-state solver")
        p.add_argument("--tol", type=float, help="steady-state tolerance")
    return parser


def _load_spec(args):
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            spec = parse_config(fh.read())
        if args.scenario and args.scenario != spec.scenario:
            spec = scenario_spec(args.scenario, base_overrides=None)
    elif args.scenario:
        spec = scenario_spec(args.scenario)
    else:
        spec = scenario_spec("generic")
    base = dict(spec.base)
    if args.nmax is not None:
        base["n_max"] = args.nmax
    solver = spec.solver
    if args.method or args.tol is not None:
        solver = SolverOptions(
            method=("null_space" if (args.method or "null-space") == "null-space"
                    else "long_time"),
            tol=args.tol if args.tol is not None else solver.tol,
            rel_tol=solver.rel_tol, t_max=solver.t_max,
            t_points=solver.t_points)
    from dataclasses import replace
    spec = replace(spec, base=base, solver=solver,
                   output_prefix=args.out or spec.output_prefix)
    return spec


def _base_params(spec):
    _, values = spec.grid()[0]
    return resolve_point(spec, values)


def _cmd_steady(spec) -> int:
    params = _base_params(spec)
    space = space_for(params)
    result = steady_state(liouvillian(params, space), spec.solver.method,
                          tol=spec.solver.tol, space=space)
    payload = {
        "occupations": [
            float(expectation(result.rho, phonon_number(space, j)).real)
            for j in range(1, params.n_atoms + 1)],
        "residual": result.residual,
        "relative_residual": result.residual / result.scale,
        "null_space_dimension": result.null_space_dimension,
        "method": result.method,
        "converged": result.converged,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_evolve(spec) -> int:
    params = _base_params(spec)
    space = space_for(params)
    grid = default_time_grid(params, spec.solver.t_points)
    grid = grid[grid <= spec.solver.t_max]
    traj = evolve(liouvillian(params, space),
                  thermal_state(spec.base["n0"], space), grid, space,
                  rel_tol=spec.solver.rel_tol)
    rows = ["time," + ",".join(f"n{j}" for j in range(1, params.n_atoms + 1))]
    for i, t in enumerate(traj.times):
        rows.append(",".join([repr(float(t))]
                             + [repr(float(x)) for x in traj.phonon[i]]))
    text = "\n".join(rows) + "\n"
    if spec.output_prefix:
        path = f"{spec.output_prefix}.trajectory.csv"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(path)
    else:
        print(text, end="")
    return 0


def _cmd_sweep(spec, threads) -> int:
    records = run_sweep(spec, max_workers=threads)
    failed = sum(1 for r in records if r.diagnostics.get("error"))
    if spec.output_prefix:
        for path in emit_outputs(records, spec):
            print(path)
    else:
        for rec in records:
            print(rec.knobs, {k: v for k, v in rec.observables.items()
                              if k != "trajectory"})
    if failed:
        print(f"{failed} of {len(records)} points failed", file=sys.stderr)
        return 2
    return 0


def _cmd_effective(spec) -> int:
    params = _base_params(spec)
    eff = effective_params(params)
    report = validity_report(params)
    payload = {
        "theta": list(eff.theta),
        "phi": list(eff.phi),
        "omega_eff": list(eff.omega_eff),
        "eta_eff": eff.eta_eff,
        "gamma_eff": list(eff.gamma_eff),
        "gamma_eff_left": [list(r) for r in eff.gamma_eff_left],
        "gamma_eff_right": [list(r) for r in eff.gamma_eff_right],
        "validity": report.to_dict(),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_analytic(spec) -> int:
    betas = np.linspace(0.0, 1.0, 21)
    for axis in spec.axes:
        if axis.knob == "beta":
            betas = np.asarray(axis.values())
    print("beta,n1_closed,n1_ld_limit,ratio_limit")
    for beta in betas:
        point = dict(spec.base)
        point["beta"] = float(beta)
        from dataclasses import replace
        params = resolve_point(replace(spec, base=point), {})
        eff = effective_params(params)
        closed = closed_form_n1(eff)
        ld = lamb_dicke_limit_n1(eff)
        ratio = ratio_limit(params.gamma_g_left, params.gamma_g_right)
        print(f"{float(beta)!r},{closed!r},{ld!r},{ratio!r}")
    return 0


def _cmd_validate(spec) -> int:
    params = _base_params(spec)
    report = validity_report(params)
    for line in report.warnings():
        print(f"warning: {line}")
    print("config ok")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage()
        return 1
    try:
        spec = _load_spec(args)
        if args.command == "steady":
            return _cmd_steady(spec)
        if args.command == "evolve":
            return _cmd_evolve(spec)
        if args.command == "sweep":
            return _cmd_sweep(spec, args.threads)
        if args.command == "effective":
            return _cmd_effective(spec)
        if args.command == "analytic":
            return _cmd_analytic(spec)
        if args.command == "validate":
            return _cmd_validate(spec)
        parser.print_usage()
        return 1
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
