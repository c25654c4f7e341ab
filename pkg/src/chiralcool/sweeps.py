"""Figure-preset and generic parameter sweeps with tabular output.

A sweep is described by a :class:`SweepSpec`: a scenario name, up to
two grid axes over registered parameter knobs, base-parameter
overrides, an observable list and solver options.  Specs come from flat
``key = value`` config files (sections ``[system] [drives] [decay]
[geometry] [sweep] [solver] [output]``) or from :func:`scenario_spec`.
Grid points are evaluated concurrently by a process pool; records are
merged in grid order, so outputs are byte-identical regardless of
worker count.  Volatile measurements (wall time) never enter the
emitted files.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .analytic import SingularReducedSystemError, closed_form_n1
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
from .model import PhysicalParams, liouvillian, space_for

THREADS_ENV = "CHIRALCOOL_THREADS"

SCENARIOS = ("fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "generic")

#: knobs a sweep axis may scan (plus per-scenario index knobs below)
KNOBS = ("beta", "xi_over_pi", "gamma_g", "gamma_r", "probe_ratio",
         "drive_scale2", "omega_g1", "omega_r1", "omega_g2", "omega_r2",
         "eta", "n0")
INDEX_KNOBS = ("case", "drive_set")

#: (gamma_g, beta) of the three contrasted time-dynamics regimes, with
#: gamma_g + gamma_r pinned to 20
FIG3_STARS = ((18.0, 0.3), (18.0, 0.7), (2.0, 0.7))
#: (omega_g1, omega_r1, omega_g2, omega_r2) drive sets of the
#: closed-form comparison, weak to strong control field
FIG4_DRIVES = ((1.5, 15.0, 0.015, 15.0), (3.0, 30.0, 0.03, 30.0))

_BASE_DEFAULTS = {
    "n_atoms": 2,
    "nu": 1.0,
    "n_max": 2,
    "omega_r1": 15.0,
    "probe_ratio": 0.1,
    "drive_scale2": 0.1,
    "omega_g1": None,
    "omega_g2": None,
    "omega_r2": None,
    "delta1": None,
    "delta2": None,
    "gamma_g": 18.0,
    "gamma_r": 2.0,
    "beta": 0.7,
    "gamma_sum": None,
    "gamma_g_left": None,
    "gamma_g_right": None,
    "gamma_r_left": None,
    "gamma_r_right": None,
    "xi_over_pi": 2.0,
    "eta": 0.15,
    "eta_g": None,
    "eta_r": None,
    "psi_g_over_pi": 0.25,
    "psi_r_over_pi": 0.75,
    "n0": 0.7,
}

_SOLVER_DEFAULTS = {
    "method": "null_space",
    "tol": 1e-9,
    "rel_tol": 1e-6,
    "t_max": 3000.0,
    "t_points": 400,
}

_SECTION_KEYS = {
    "system": ("n_atoms", "nu", "n_max"),
    "drives": ("omega_r1", "probe_ratio", "drive_scale2", "omega_g1",
               "omega_g2", "omega_r2", "delta1", "delta2"),
    "decay": ("gamma_g", "gamma_r", "beta", "gamma_sum", "gamma_g_left",
              "gamma_g_right", "gamma_r_left", "gamma_r_right"),
    "geometry": ("xi_over_pi", "eta", "eta_g", "eta_r", "psi_g_over_pi",
                 "psi_r_over_pi"),
    "sweep": ("scenario", "axis1", "axis2", "observables"),
    "solver": ("method", "tol", "rel_tol", "t_max", "t_points", "n0"),
    "output": ("prefix", "heatmap"),
}
_INT_KEYS = {"n_atoms", "n_max", "t_points"}


class ConfigError(ValueError):
    """Malformed or contradictory sweep configuration."""


@dataclass(frozen=True)
class Axis:
    knob: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.knob not in KNOBS + INDEX_KNOBS:
            raise ConfigError(f"unknown sweep knob {self.knob!r}")
        if self.points < 2:
            raise ConfigError(f"axis {self.knob!r} needs at least 2 points")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"axis scale must be linear or log, "
                              f"got {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log axis needs positive endpoints")

    def values(self) -> tuple[float, ...]:
        if self.scale == "log":
            vals = np.geomspace(self.start, self.stop, self.points)
        else:
            vals = np.linspace(self.start, self.stop, self.points)
        return tuple(float(v) for v in vals)


@dataclass(frozen=True)
class SolverOptions:
    method: str = "null_space"
    tol: float = 1e-9
    rel_tol: float = 1e-6
    t_max: float = 3000.0
    t_points: int = 400


@dataclass(frozen=True)
class SweepSpec:
    scenario: str = "generic"
    axes: tuple[Axis, ...] = ()
    base: dict = field(default_factory=lambda: dict(_BASE_DEFAULTS))
    observables: tuple[str, ...] = ("n1_ss", "n2_ss", "n1_tilde", "n2_tilde")
    solver: SolverOptions = SolverOptions()
    output_prefix: str | None = None
    heatmap: bool = False

    def knob_names(self) -> tuple[str, ...]:
        return tuple(axis.knob for axis in self.axes)

    def grid(self) -> list[tuple[tuple[int, ...], dict]]:
        """All grid points as (index tuple, {knob: value})."""
        if not self.axes:
            return [((), {})]
        value_sets = [axis.values() for axis in self.axes]
        index_sets = [range(axis.points) for axis in self.axes]
        out = []
        for idx, vals in zip(itertools.product(*index_sets),
                             itertools.product(*value_sets)):
            out.append((idx, dict(zip(self.knob_names(), vals))))
        return out

    def to_config_text(self) -> str:
        """Render the fully resolved spec as a parseable config file."""
        buf = io.StringIO()
        sections: dict[str, list[tuple[str, str]]] = {
            name: [] for name in _SECTION_KEYS}
        for section, keys in _SECTION_KEYS.items():
            for key in keys:
                if key in self.base and self.base[key] is not None:
                    sections[section].append((key, repr(self.base[key])))
        sections["sweep"].append(("scenario", self.scenario))
        for i, axis in enumerate(self.axes, start=1):
            sections["sweep"].append(
                (f"axis{i}", f"{axis.knob} {axis.start!r} {axis.stop!r} "
                             f"{axis.points} {axis.scale}"))
        sections["sweep"].append(("observables", " ".join(self.observables)))
        sections["solver"] = [
            ("method", "null-space" if self.solver.method == "null_space"
             else "long-time"),
            ("tol", repr(self.solver.tol)),
            ("rel_tol", repr(self.solver.rel_tol)),
            ("t_max", repr(self.solver.t_max)),
            ("t_points", str(self.solver.t_points)),
            ("n0", repr(self.base["n0"])),
        ]
        if self.output_prefix:
            sections["output"].append(("prefix", self.output_prefix))
        sections["output"].append(("heatmap", str(self.heatmap).lower()))
        for section in _SECTION_KEYS:
            pairs = sections[section]
            if not pairs:
                continue
            buf.write(f"[{section}]\n")
            for key, value in pairs:
                buf.write(f"{key} = {value}\n")
            buf.write("\n")
        return buf.getvalue()


def scenario_spec(scenario: str, base_overrides: dict | None = None,
                  axes: tuple[Axis, ...] | None = None,
                  observables: tuple[str, ...] | None = None,
                  solver: SolverOptions | None = None,
                  output_prefix: str | None = None,
                  heatmap: bool = False) -> SweepSpec:
    """Preset spec of a named scenario, with optional overrides.

    Passing ``axes`` replaces the preset grid entirely, which is how
    one-dimensional slices of the preset maps are taken.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    base = dict(_BASE_DEFAULTS)
    preset_axes: tuple[Axis, ...] = ()
    obs: tuple[str, ...] = ("n1_ss", "n2_ss", "n1_tilde", "n2_tilde")
    if scenario == "fig2a":
        preset_axes = (Axis("probe_ratio", 0.02, 0.3, 21),
                       Axis("beta", 0.0, 1.0, 21))
    elif scenario == "fig2b":
        preset_axes = (Axis("drive_scale2", 0.02, 1.0, 21),
                       Axis("beta", 0.0, 1.0, 21))
    elif scenario == "fig2c":
        base["gamma_sum"] = 20.0
        preset_axes = (Axis("gamma_g", 0.0, 20.0, 21),
                       Axis("beta", 0.0, 1.0, 21))
    elif scenario == "fig2d":
        preset_axes = (Axis("xi_over_pi", 0.5, 2.0, 31),
                       Axis("beta", 0.0, 1.0, 21))
    elif scenario == "fig3":
        base["gamma_sum"] = 20.0
        preset_axes = (Axis("case", 0, len(FIG3_STARS) - 1, len(FIG3_STARS)),)
        obs = ("trajectory", "n1_ss", "n2_ss", "n1_tilde", "n2_tilde")
    elif scenario == "fig4":
        base["eta"] = 0.1
        preset_axes = (Axis("drive_set", 0, len(FIG4_DRIVES) - 1,
                            len(FIG4_DRIVES)),
                       Axis("beta", 0.0, 1.0, 21))
        obs = ("n1_ss", "n1_closed", "n1_tilde")
    if base_overrides:
        unknown = set(base_overrides) - set(base)
        if unknown:
            raise ConfigError(f"unknown base parameters: {sorted(unknown)}")
        base.update(base_overrides)
    _validate_base(scenario, base)
    return SweepSpec(
        scenario=scenario,
        axes=axes if axes is not None else preset_axes,
        base=base,
        observables=observables if observables is not None else obs,
        solver=solver if solver is not None else SolverOptions(),
        output_prefix=output_prefix,
        heatmap=heatmap)


def _validate_base(scenario: str, base: dict) -> None:
    if base["n_atoms"] not in (1, 2):
        raise ConfigError("n_atoms must be 1 or 2")
    if base["gamma_sum"] is not None:
        total = base["gamma_sum"]
        if base["gamma_g"] is not None and base["gamma_r"] is not None:
            if abs(base["gamma_g"] + base["gamma_r"] - total) > 1e-9:
                raise ConfigError(
                    f"gamma_g + gamma_r must equal gamma_sum = {total}")
    directional = [base[k] for k in ("gamma_g_left", "gamma_g_right",
                                     "gamma_r_left", "gamma_r_right")]
    if any(v is not None for v in directional) and None in directional:
        raise ConfigError("give all four directional rates or none")


def resolve_point(spec: SweepSpec, knob_values: dict) -> PhysicalParams:
    """PhysicalParams of one grid point: base values plus axis knobs."""
    base = dict(spec.base)
    for knob, value in knob_values.items():
        if knob == "case":
            gamma_g, beta = FIG3_STARS[int(round(value))]
            base["gamma_g"] = gamma_g
            base["beta"] = beta
            if base.get("gamma_sum") is not None:
                base["gamma_r"] = base["gamma_sum"] - gamma_g
        elif knob == "drive_set":
            og1, or1, og2, or2 = FIG4_DRIVES[int(round(value))]
            base.update(omega_g1=og1, omega_r1=or1, omega_g2=og2,
                        omega_r2=or2)
        else:
            base[knob] = value
    if base.get("gamma_sum") is not None:
        base["gamma_r"] = base["gamma_sum"] - base["gamma_g"]
        if base["gamma_r"] < 0:
            raise ConfigError("gamma_sum constraint forces gamma_r < 0")

    omega_r1 = base["omega_r1"]
    omega_g1 = (base["omega_g1"] if base["omega_g1"] is not None
                else base["probe_ratio"] * omega_r1)
    drives_g, drives_r = [omega_g1], [omega_r1]
    if base["n_atoms"] == 2:
        omega_r2 = (base["omega_r2"] if base["omega_r2"] is not None
                    else base["drive_scale2"] * omega_r1)
        omega_g2 = (base["omega_g2"] if base["omega_g2"] is not None
                    else base["probe_ratio"] * omega_r2)
        drives_g.append(omega_g2)
        drives_r.append(omega_r2)

    deltas = [base["delta1"], base["delta2"]][:base["n_atoms"]]
    if all(d is not None for d in deltas):
        delta = tuple(deltas)
    elif any(d is not None for d in deltas):
        raise ConfigError("give detunings for every atom or none")
    else:
        delta = None

    eta_g = base["eta_g"] if base["eta_g"] is not None else base["eta"]
    eta_r = base["eta_r"] if base["eta_r"] is not None else base["eta"]
    common = dict(
        delta=delta, eta_g=eta_g, eta_r=eta_r,
        psi_g=base["psi_g_over_pi"] * math.pi,
        psi_r=base["psi_r_over_pi"] * math.pi,
        xi=base["xi_over_pi"] * math.pi,
        nu=base["nu"], n_max=base["n_max"])
    if base["gamma_g_left"] is not None:
        return PhysicalParams(
            omega_g=tuple(drives_g), omega_r=tuple(drives_r),
            gamma_g_left=base["gamma_g_left"],
            gamma_g_right=base["gamma_g_right"],
            gamma_r_left=base["gamma_r_left"],
            gamma_r_right=base["gamma_r_right"], **common)
    return PhysicalParams.from_directionality(
        drives_g, drives_r, base["gamma_g"], base["gamma_r"], base["beta"],
        **common)


@dataclass(frozen=True)
class ResultRecord:
    index: tuple[int, ...]
    knobs: dict
    params: dict
    observables: dict
    diagnostics: dict
    wall_time: float    # in-memory diagnostic; never written to files


def _params_summary(params: PhysicalParams) -> dict:
    return {
        "omega_g": list(params.omega_g),
        "omega_r": list(params.omega_r),
        "delta": list(params.detunings()),
        "gamma_g": params.gamma_g,
        "gamma_r": params.gamma_r,
        "beta": params.beta,
        "xi": params.xi,
        "eta_g": params.eta_g,
        "eta_r": params.eta_r,
        "n_max": params.n_max,
    }


def _evaluate_point(task) -> ResultRecord:
    spec, index, knob_values, check_kernel = task
    start = time.perf_counter()
    observables: dict = {}
    diagnostics: dict = {"error": None, "converged": None,
                         "residual": None, "null_space_dimension": None}
    try:
        params = resolve_point(spec, knob_values)
        summary = _params_summary(params)
        solver = spec.solver
        want = set(spec.observables)
        if "trajectory" in want:
            observables.update(_trajectory_observables(params, spec))
        if {"n1_tilde", "n2_tilde"} & want or "trajectory" in want:
            ratio = cooling_ratio(params, method=solver.method,
                                  check_kernel=check_kernel,
                                  tol=solver.tol)
            observables["n1_tilde"] = float(ratio.n_tilde[0])
            observables["n2_tilde"] = float(ratio.n_tilde[1])
            observables["n1_ss"] = float(ratio.occupations[0])
            observables["n2_ss"] = float(ratio.occupations[1])
            observables["n1_single"] = float(ratio.baselines[0])
            observables["n2_single"] = float(ratio.baselines[1])
            diagnostics["residual"] = float(ratio.diagnostics["residual"])
            diagnostics["converged"] = bool(ratio.diagnostics["converged"])
            diagnostics["null_space_dimension"] = (
                ratio.diagnostics["null_space_dimension"])
        elif {"n1_ss", "n2_ss"} & want:
            space = space_for(params)
            result = steady_state(
                liouvillian(params, space), solver.method, tol=solver.tol,
                space=space, check_kernel=check_kernel)
            for j in range(1, params.n_atoms + 1):
                key = f"n{j}_ss"
                if key in want:
                    observables[key] = float(
                        expectation(result.rho, phonon_number(space, j)).real)
            diagnostics["residual"] = float(result.residual)
            diagnostics["converged"] = bool(result.converged)
            diagnostics["null_space_dimension"] = result.null_space_dimension
        if "n1_closed" in want:
            observables["n1_closed"] = float(
                closed_form_n1(effective_params(params)))
    except (DegenerateSteadyStateError, ConvergenceError, IntegrationError,
            SingularReducedSystemError, ConfigError, ValueError) as exc:
        diagnostics["error"] = f"{type(exc).__name__}: {exc}"
        summary = {}
        for name in spec.observables:
            observables.setdefault(name, math.nan)
    return ResultRecord(
        index=index, knobs=dict(knob_values), params=summary,
        observables=observables, diagnostics=diagnostics,
        wall_time=time.perf_counter() - start)


def _trajectory_observables(params: PhysicalParams, spec: SweepSpec) -> dict:
    solver = spec.solver
    n0 = spec.base["n0"]
    grid = default_time_grid(params, solver.t_points)
    grid = grid[grid <= solver.t_max]
    if grid[-1] < solver.t_max:
        grid = np.append(grid, solver.t_max)
    space = space_for(params)
    traj = evolve(liouvillian(params, space), thermal_state(n0, space), grid,
                  space, rel_tol=solver.rel_tol)
    out = {
        "times": [float(t) for t in traj.times],
        "n1": [float(x) for x in traj.phonon[:, 0]],
    }
    if params.n_atoms == 2:
        out["n2"] = [float(x) for x in traj.phonon[:, 1]]
    for j in range(1, params.n_atoms + 1):
        single = params.single_atom(j)
        sspace = space_for(single)
        straj = evolve(liouvillian(single, sspace),
                       thermal_state(n0, sspace), grid, sspace,
                       rel_tol=solver.rel_tol)
        out[f"n{j}_single_t"] = [float(x) for x in straj.phonon[:, 0]]
    return {"trajectory": out}


def default_workers() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return min(2, os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, max_workers: int | None = None) -> list[ResultRecord]:
    """Evaluate every grid point, concurrently, in deterministic grid
    order.  Per-point solver failures are recorded in the point's
    diagnostics rather than aborting the sweep."""
    workers = max_workers if max_workers is not None else default_workers()
    tasks = [(spec, idx, values, flat == 0)
             for flat, (idx, values) in enumerate(spec.grid())]
    if workers <= 1 or len(tasks) <= 1:
        records = [_evaluate_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_evaluate_point, tasks, chunksize=1))
    return sorted(records, key=lambda r: r.index)


def _spec_as_dict(spec: SweepSpec) -> dict:
    return {
        "scenario": spec.scenario,
        "axes": [
            {"knob": a.knob, "start": a.start, "stop": a.stop,
             "points": a.points, "scale": a.scale}
            for a in spec.axes],
        "base": {k: v for k, v in sorted(spec.base.items())},
        "observables": list(spec.observables),
        "solver": {
            "method": spec.solver.method, "tol": spec.solver.tol,
            "rel_tol": spec.solver.rel_tol, "t_max": spec.solver.t_max,
            "t_points": spec.solver.t_points},
        "output_prefix": spec.output_prefix,
        "heatmap": spec.heatmap,
    }


def emit_outputs(records: list[ResultRecord], spec: SweepSpec,
                 prefix: str | None = None) -> list[str]:
    """Write the CSV table, the JSON metadata sidecar and (for
    two-axis sweeps, on request) gnuplot-style .dat blocks.

    Outputs are deterministic: identical spec and records give identical
    bytes; wall times and other volatile diagnostics stay in memory.
    """
    if not records:
        raise ValueError("no records to emit")
    prefix = prefix or spec.output_prefix
    if not prefix:
        raise ValueError("no output prefix given")
    directory = os.path.dirname(prefix)
    if directory:
        os.makedirs(directory, exist_ok=True)

    paths = []
    scalar_names = [n for n in spec.observables if n != "trajectory"]
    extra = [n for n in ("n1_ss", "n2_ss", "n1_single", "n2_single")
             if n not in scalar_names and n in records[0].observables]
    scalar_names += extra
    knob_names = list(spec.knob_names())

    csv_path = f"{prefix}.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(knob_names + scalar_names
                        + ["residual", "converged", "null_space_dim", "error"])
        for rec in records:
            row = [_fmt(rec.knobs.get(k)) for k in knob_names]
            row += [_fmt(rec.observables.get(name)) for name in scalar_names]
            row += [_fmt(rec.diagnostics.get("residual")),
                    _fmt(rec.diagnostics.get("converged")),
                    _fmt(rec.diagnostics.get("null_space_dimension")),
                    rec.diagnostics.get("error") or ""]
            writer.writerow(row)
    paths.append(csv_path)

    if any("trajectory" in rec.observables for rec in records):
        traj_path = f"{prefix}.trajectories.csv"
        with open(traj_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            series = sorted({key for rec in records
                             for key in rec.observables.get("trajectory", {})
                             if key != "times"})
            writer.writerow(knob_names + ["time"] + series)
            for rec in records:
                traj = rec.observables.get("trajectory")
                if not traj:
                    continue
                knobs = [_fmt(rec.knobs.get(k)) for k in knob_names]
                for i, t in enumerate(traj["times"]):
                    writer.writerow(
                        knobs + [_fmt(t)]
                        + [_fmt(traj[name][i]) if name in traj else ""
                           for name in series])
        paths.append(traj_path)

    meta = {
        "tool": "chiralcool",
        "version": __version__,
        "spec": _spec_as_dict(spec),
        "config_text": spec.to_config_text(),
        "diagnostics_summary": {
            "points": len(records),
            "failed": sum(1 for r in records if r.diagnostics.get("error")),
            "max_residual": _fmt_or_none(max(
                (r.diagnostics.get("residual") for r in records
                 if r.diagnostics.get("residual") is not None),
                default=None)),
            "kernel_dimensions": sorted({
                r.diagnostics.get("null_space_dimension")
                for r in records
                if r.diagnostics.get("null_space_dimension") is not None}),
        },
        "validity": _base_validity(spec),
    }
    json_path = f"{prefix}.meta.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(json_path)

    if spec.heatmap and len(spec.axes) == 2 and scalar_names:
        dat_path = f"{prefix}.dat"
        with open(dat_path, "w", encoding="utf-8") as fh:
            fh.write("# " + " ".join(knob_names + scalar_names) + "\n")
            last_lead = None
            for rec in records:
                lead = rec.index[0]
                if last_lead is not None and lead != last_lead:
                    fh.write("\n")
                last_lead = lead
                vals = [rec.knobs.get(k) for k in knob_names]
                vals += [rec.observables.get(n) for n in scalar_names]
                fh.write(" ".join(_fmt(v) or "nan" for v in vals) + "\n")
        paths.append(dat_path)
    return paths


def _base_validity(spec: SweepSpec) -> dict | None:
    try:
        _, values = spec.grid()[0]
        params = resolve_point(spec, values)
        return validity_report(params).to_dict()
    except (ConfigError, ValueError):
        return None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_or_none(value):
    return None if value is None else value


def parse_config(text: str) -> SweepSpec:
    """Parse a flat-section config into a fully resolved SweepSpec.

    Unknown sections or keys, malformed values and contradictory
    constraints raise :class:`ConfigError` naming the offender.
    """
    import configparser

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SECTION_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    def get(section: str, key: str, default):
        if parser.has_option(section, key):
            raw = parser.get(section, key).strip()
            if key in _INT_KEYS:
                try:
                    return int(raw)
                except ValueError:
                    raise ConfigError(
                        f"key {key!r} must be an integer, got {raw!r}") from None
            try:
                return float(raw)
            except ValueError:
                raise ConfigError(
                    f"key {key!r} must be a number, got {raw!r}") from None
        return default

    scenario = "generic"
    if parser.has_option("sweep", "scenario"):
        scenario = parser.get("sweep", "scenario").strip()
        if scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {scenario!r}")

    base_overrides = {}
    for section in ("system", "drives", "decay", "geometry"):
        if not parser.has_section(section):
            continue
        for key in parser[section]:
            base_overrides[key] = get(section, key, None)
    if parser.has_option("solver", "n0"):
        base_overrides["n0"] = get("solver", "n0", 0.7)

    axes = []
    for name in ("axis1", "axis2"):
        if parser.has_option("sweep", name):
            axes.append(_parse_axis(name, parser.get("sweep", name)))
    observables = None
    if parser.has_option("sweep", "observables"):
        observables = tuple(parser.get("sweep", "observables").split())

    method = "null_space"
    if parser.has_option("solver", "method"):
        raw = parser.get("solver", "method").strip()
        mapping = {"null-space": "null_space", "null_space": "null_space",
                   "long-time": "long_time", "long_time": "long_time"}
        if raw not in mapping:
            raise ConfigError(f"unknown solver method {raw!r}")
        method = mapping[raw]
    solver = SolverOptions(
        method=method,
        tol=get("solver", "tol", _SOLVER_DEFAULTS["tol"]),
        rel_tol=get("solver", "rel_tol", _SOLVER_DEFAULTS["rel_tol"]),
        t_max=get("solver", "t_max", _SOLVER_DEFAULTS["t_max"]),
        t_points=get("solver", "t_points", _SOLVER_DEFAULTS["t_points"]))

    prefix = (parser.get("output", "prefix").strip()
              if parser.has_option("output", "prefix") else None)
    heatmap = False
    if parser.has_option("output", "heatmap"):
        raw = parser.get("output", "heatmap").strip().lower()
        if raw not in ("true", "false"):
            raise ConfigError(f"heatmap must be true or false, got {raw!r}")
        heatmap = raw == "true"

    return scenario_spec(
        scenario, base_overrides=base_overrides,
        axes=tuple(axes) if axes else None,
        observables=observables, solver=solver,
        output_prefix=prefix, heatmap=heatmap)


def _parse_axis(name: str, raw: str) -> Axis:
    parts = raw.split()
    if len(parts) not in (4, 5):
        raise ConfigError(
            f"{name} must be 'knob start stop points [linear|log]', "
            f"got {raw!r}")
    knob, start, stop, points = parts[:4]
    scale = parts[4] if len(parts) == 5 else "linear"
    try:
        return Axis(knob, float(start), float(stop), int(points), scale)
    except ValueError as exc:
        raise ConfigError(f"bad axis {name}: {exc}") from exc
