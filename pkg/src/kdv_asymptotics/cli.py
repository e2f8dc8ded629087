"""Configuration-driven command-line front end.

Commands (all take a JSON config):

    simulate-full      integrate the stiff system, write (x, u, v) snapshots
    simulate-regular   evaluate the effective-wave asymptotics on the grid
    simulate-kdv       evolve both KdV frames from split burst data, write the
                       composed fields
    compare            full vs asymptotic error table over the output times
    sweep              eps-convergence study with a summary table
    verify-derivation  solvability and order-2 cancellation certificates

Outputs are deterministic: identical configs produce byte-identical CSVs
(fixed significant-digit formatting, no wall-clock data; per-row runtimes of a
sweep go to a plain-text .timings.txt sidecar).  Exit codes: 0 success,
2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .composer import build_burst_asymptotics, compose
from .core import (
    Epsilon,
    Grid1D,
    InitialConditionKind,
    InitialConditionSpec,
    NonlinearitySpec,
    PhysParams,
    Profile,
    ProfileKind,
)
from .effective import (
    EffectiveParams,
    check_solvability,
    verify_order2_cancellation,
)
from .errors import KdvAsymptoticsError, ParseError, ValidationError
from .full_solver import SolverConfig, simulate_full
from .regular import RegularExpansion
from .verifier import (
    ErrorReport,
    SweepMode,
    SweepProblem,
    _burst_snapshot,
    _regular_snapshot,
    convergence_sweep,
    error_norms,
    pde_residual,
)

_PROFILE_KINDS = {kind.value: kind for kind in ProfileKind}
_IC_KINDS = {kind.value: kind for kind in InitialConditionKind}


# ---------------------------------------------------------------- parsing

def _require_mapping(value, path):
    if not isinstance(value, dict):
        raise ValidationError("must be an object", field=path)
    return value


def _reject_unknown(section, path, allowed):
    unknown = set(section) - set(allowed)
    if unknown:
        name = sorted(unknown)[0]
        raise ValidationError("unknown key", field=f"{path}.{name}")


def _number(section, path, key, default=None, required=False):
    if key not in section or section[key] is None:
        if required:
            raise ValidationError("is required", field=f"{path}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError("must be a number", field=f"{path}.{key}")
    if not math.isfinite(value):
        raise ValidationError("must be finite", field=f"{path}.{key}")
    return float(value)


def _integer(section, path, key, default=None, required=False):
    if key not in section or section[key] is None:
        if required:
            raise ValidationError("is required", field=f"{path}.{key}")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError("must be an integer", field=f"{path}.{key}")
    return value


def _rewrap(exc: ValidationError, path: str) -> ValidationError:
    field = f"{path}.{exc.field}" if exc.field else path
    message = str(exc).split(": ", 1)[-1]
    return ValidationError(message, field=field)


def _parse_profile(section, path) -> Profile:
    section = _require_mapping(section, path)
    _reject_unknown(section, path,
                    ("profile", "amplitude", "width", "center", "window_width"))
    kind_name = section.get("profile", "gaussian")
    if kind_name not in _PROFILE_KINDS:
        raise ValidationError(
            f"must be one of {sorted(_PROFILE_KINDS)}", field=f"{path}.profile"
        )
    try:
        return Profile(
            kind=_PROFILE_KINDS[kind_name],
            amplitude=_number(section, path, "amplitude", default=1.0),
            width=_number(section, path, "width", default=1.0),
            center=_number(section, path, "center", default=0.0),
            window_width=_number(section, path, "window_width", default=None),
        )
    except ValidationError as exc:
        raise _rewrap(exc, path) from None


def _parse_grid(section, path, default=None) -> Grid1D:
    if section is None:
        if default is not None:
            return default
        raise ValidationError("is required", field=path)
    section = _require_mapping(section, path)
    _reject_unknown(section, path, ("half_length", "n"))
    try:
        return Grid1D(
            half_length=_number(section, path, "half_length", required=True),
            n=_integer(section, path, "n", required=True),
        )
    except ValidationError as exc:
        raise _rewrap(exc, path) from None


@dataclass
class TimeConfig:
    t_end: float
    output_times: list[float]
    cfl: float
    substeps_per_oscillation: int
    dt: float | None
    kdv_dt: float | None


@dataclass
class OutputConfig:
    csv_path: str
    svg_path: str | None
    precision: int


@dataclass
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    params: PhysParams
    epsilon: float | None
    epsilon_list: list[float] | None
    f: NonlinearitySpec
    grid: Grid1D
    zeta_grid: Grid1D
    time: TimeConfig
    initial: InitialConditionSpec
    outputs: OutputConfig
    raw: dict

    def require_epsilon(self) -> Epsilon:
        if self.epsilon is None:
            raise ValidationError("is required for this command", field="epsilon")
        return Epsilon(self.epsilon)

    def require_epsilon_list(self) -> list[float]:
        if self.epsilon_list is None:
            raise ValidationError("is required for this command", field="epsilon_list")
        return self.epsilon_list


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a JSON experiment document.

    Unknown keys anywhere are rejected; every invariant violation names the
    offending field path.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    top = _require_mapping(raw, "config")
    _reject_unknown(top, "config",
                    ("params", "epsilon", "epsilon_list", "nonlinearity", "grid",
                     "zeta_grid", "time", "initial", "outputs"))

    params_sec = _require_mapping(top.get("params"), "params")
    _reject_unknown(params_sec, "params", ("k1", "k2", "a", "b"))
    try:
        params = PhysParams(
            k1=_number(params_sec, "params", "k1", required=True),
            k2=_number(params_sec, "params", "k2", required=True),
            a=_number(params_sec, "params", "a", required=True),
            b=_number(params_sec, "params", "b", required=True),
        )
    except ValidationError as exc:
        raise _rewrap(exc, "params") from None

    if "epsilon" in top and "epsilon_list" in top:
        raise ValidationError("give either epsilon or epsilon_list, not both",
                              field="epsilon")
    epsilon = _number(top, "config", "epsilon", default=None)
    if epsilon is not None:
        try:
            Epsilon(epsilon)
        except ValidationError as exc:
            raise _rewrap(exc, "epsilon") from None
    epsilon_list = None
    if "epsilon_list" in top:
        seq = top["epsilon_list"]
        if not isinstance(seq, list) or not seq:
            raise ValidationError("must be a non-empty array", field="epsilon_list")
        epsilon_list = []
        for idx, value in enumerate(seq):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError("must be a number",
                                      field=f"epsilon_list[{idx}]")
            try:
                Epsilon(float(value))
            except ValidationError as exc:
                raise _rewrap(exc, f"epsilon_list[{idx}]") from None
            epsilon_list.append(float(value))

    nl_sec = top.get("nonlinearity")
    if nl_sec is None:
        f = NonlinearitySpec()
    else:
        nl_sec = _require_mapping(nl_sec, "nonlinearity")
        _reject_unknown(nl_sec, "nonlinearity", ("terms",))
        terms = nl_sec.get("terms", [])
        if not isinstance(terms, list):
            raise ValidationError("must be an array", field="nonlinearity.terms")
        try:
            f = NonlinearitySpec(terms=tuple(tuple(t) for t in terms))
        except (TypeError, ValidationError) as exc:
            if isinstance(exc, ValidationError):
                raise _rewrap(exc, "nonlinearity") from None
            raise ValidationError("each term must be [i, j, coeff]",
                                  field="nonlinearity.terms") from None

    grid = _parse_grid(top.get("grid"), "grid")
    zeta_grid = _parse_grid(top.get("zeta_grid"), "zeta_grid",
                            default=Grid1D(half_length=40.0, n=512))

    time_sec = _require_mapping(top.get("time"), "time")
    _reject_unknown(time_sec, "time",
                    ("t_end", "output_times", "output_count", "cfl",
                     "substeps_per_oscillation", "dt", "kdv_dt"))
    t_end = _number(time_sec, "time", "t_end", required=True)
    if t_end <= 0:
        raise ValidationError("must be positive", field="time.t_end")
    if "output_times" in time_sec and "output_count" in time_sec:
        raise ValidationError("give either output_times or output_count, not both",
                              field="time.output_times")
    if "output_times" in time_sec:
        seq = time_sec["output_times"]
        if not isinstance(seq, list) or not seq:
            raise ValidationError("must be a non-empty array",
                                  field="time.output_times")
        output_times = []
        for idx, value in enumerate(seq):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError("must be a number",
                                      field=f"time.output_times[{idx}]")
            if not 0 <= value <= t_end:
                raise ValidationError("must lie in [0, t_end]",
                                      field=f"time.output_times[{idx}]")
            output_times.append(float(value))
        output_times = sorted(set(output_times))
    else:
        count = _integer(time_sec, "time", "output_count", default=1)
        if count < 1:
            raise ValidationError("must be >= 1", field="time.output_count")
        output_times = [t_end] if count == 1 else list(
            np.linspace(0.0, t_end, count)
        )
    cfl = _number(time_sec, "time", "cfl", default=0.5)
    sso = _integer(time_sec, "time", "substeps_per_oscillation", default=16)
    dt = _number(time_sec, "time", "dt", default=None)
    kdv_dt = _number(time_sec, "time", "kdv_dt", default=None)
    try:
        SolverConfig(t_end=t_end, dt=dt, cfl=cfl, substeps_per_oscillation=sso)
    except ValidationError as exc:
        raise _rewrap(exc, "time") from None
    if kdv_dt is not None and kdv_dt <= 0:
        raise ValidationError("must be positive when given", field="time.kdv_dt")
    time_cfg = TimeConfig(t_end, output_times, cfl, sso, dt, kdv_dt)

    init_sec = _require_mapping(top.get("initial"), "initial")
    _reject_unknown(init_sec, "initial",
                    ("kind", "profile", "amplitude", "width", "center",
                     "window_width", "phi_profile"))
    kind_name = init_sec.get("kind")
    if kind_name not in _IC_KINDS:
        raise ValidationError(f"must be one of {sorted(_IC_KINDS)}",
                              field="initial.kind")
    profile_u0 = _parse_profile(
        {k: v for k, v in init_sec.items() if k not in ("kind", "phi_profile")},
        "initial",
    )
    phi_sec = init_sec.get("phi_profile")
    profile_phi = Profile.zero() if phi_sec is None else _parse_profile(
        phi_sec, "initial.phi_profile"
    )
    initial = InitialConditionSpec(
        kind=_IC_KINDS[kind_name], profile_u0=profile_u0, profile_phi=profile_phi
    )

    out_sec = top.get("outputs") or {}
    out_sec = _require_mapping(out_sec, "outputs")
    _reject_unknown(out_sec, "outputs", ("csv_path", "svg_path", "precision"))
    csv_path = out_sec.get("csv_path", "out.csv")
    svg_path = out_sec.get("svg_path")
    if not isinstance(csv_path, str) or not csv_path:
        raise ValidationError("must be a non-empty string", field="outputs.csv_path")
    if svg_path is not None and (not isinstance(svg_path, str) or not svg_path):
        raise ValidationError("must be a non-empty string when given",
                              field="outputs.svg_path")
    precision = _integer(out_sec, "outputs", "precision", default=17)
    if not 1 <= precision <= 17:
        raise ValidationError("must lie in [1, 17]", field="outputs.precision")
    outputs = OutputConfig(csv_path=csv_path, svg_path=svg_path, precision=precision)

    return ExperimentConfig(
        params=params, epsilon=epsilon, epsilon_list=epsilon_list, f=f, grid=grid,
        zeta_grid=zeta_grid, time=time_cfg, initial=initial, outputs=outputs, raw=top,
    )


# ---------------------------------------------------------------- output

class _CsvWriter:
    def __init__(self, config: ExperimentConfig, command: str):
        self.precision = config.outputs.precision
        self.lines: list[str] = [
            f"# kdv-asymptotics {__version__}",
            f"# command: {command}",
            "# config: " + json.dumps(config.raw, sort_keys=True,
                                      separators=(",", ":")),
        ]

    def fmt(self, value: float) -> str:
        return format(value, f".{self.precision}g")

    def comment(self, text: str) -> None:
        self.lines.append(f"# {text}")

    def header(self, columns: list[str]) -> None:
        self.lines.append(",".join(columns))

    def row(self, values) -> None:
        self.lines.append(",".join(self.fmt(v) for v in values))

    def write(self, path: str) -> None:
        with open(path, "w", newline="\n") as handle:
            handle.write("\n".join(self.lines) + "\n")


def _resolve(path: str | None, out_dir: str | None) -> str | None:
    if path is None:
        return None
    if out_dir and not os.path.isabs(path):
        return os.path.join(out_dir, path)
    return path


def _solver_config(config: ExperimentConfig) -> SolverConfig:
    return SolverConfig(
        t_end=config.time.t_end,
        dt=config.time.dt,
        cfl=config.time.cfl,
        substeps_per_oscillation=config.time.substeps_per_oscillation,
    )


def _write_snapshots(config: ExperimentConfig, command: str, snapshots,
                     csv_path: str) -> None:
    writer = _CsvWriter(config, command)
    writer.comment("snapshot timestamps are simulation times")
    writer.header(["x", "u", "v"])
    x = config.grid.nodes
    for snap in snapshots:
        writer.comment(f"t = {writer.fmt(snap.time)}")
        for xi, ui, vi in zip(x, snap.u, snap.v):
            writer.row((xi, ui, vi))
    writer.write(csv_path)


def _sweep_problem(config: ExperimentConfig) -> tuple[SweepProblem, SweepMode]:
    mode = (SweepMode.SMOOTH_REGULAR
            if config.initial.kind is InitialConditionKind.SMOOTH
            else SweepMode.BURST_KDV)
    problem = SweepProblem(
        params=config.params,
        f=config.f,
        initial=config.initial,
        x_grid=config.grid,
        t_end=config.time.t_end,
        zeta_grid=config.zeta_grid,
        cfl=config.time.cfl,
        substeps_per_oscillation=config.time.substeps_per_oscillation,
        dt=config.time.dt,
        kdv_dt=config.time.kdv_dt,
    )
    return problem, mode


# ---------------------------------------------------------------- commands

def _cmd_simulate_full(config: ExperimentConfig, csv_path, svg_path, say):
    eps = config.require_epsilon()
    snapshots = simulate_full(
        config.initial, config.grid, config.params, config.f, eps,
        _solver_config(config), output_times=config.time.output_times,
    )
    _write_snapshots(config, "simulate-full", snapshots, csv_path)
    say(f"wrote {len(snapshots)} snapshot(s) to {csv_path}")
    if svg_path:
        from .plotting import plot_profiles

        final = snapshots[-1]
        plot_profiles(svg_path, config.grid.nodes,
                      {"u": final.u, "v": final.v},
                      title=f"full solution at t = {final.time:g}")
        say(f"wrote {svg_path}")


def _cmd_simulate_regular(config: ExperimentConfig, csv_path, svg_path, say):
    if config.initial.kind is not InitialConditionKind.SMOOTH:
        raise ValidationError("simulate-regular needs smooth data",
                              field="initial.kind")
    eff = EffectiveParams.from_params(config.params)
    expansion = RegularExpansion(config.initial, config.params, config.f, eff.c)
    problem, _ = _sweep_problem(config)
    snapshots = [_regular_snapshot(problem, expansion, t)
                 for t in config.time.output_times]
    _write_snapshots(config, "simulate-regular", snapshots, csv_path)
    say(f"wrote {len(snapshots)} snapshot(s) to {csv_path}")
    if svg_path:
        from .plotting import plot_profiles

        final = snapshots[-1]
        plot_profiles(svg_path, config.grid.nodes,
                      {"u0_bar": final.u, "v0_bar": final.v},
                      title=f"effective-wave asymptotics at t = {final.time:g}")
        say(f"wrote {svg_path}")


def _cmd_simulate_kdv(config: ExperimentConfig, csv_path, svg_path, say):
    if config.initial.kind is not InitialConditionKind.BURST:
        raise ValidationError("simulate-kdv needs burst data", field="initial.kind")
    eps = config.require_epsilon()
    asym = build_burst_asymptotics(
        config.initial, config.params, config.f, eps, config.zeta_grid,
        t_end=config.time.t_end, output_times=config.time.output_times,
        dt=config.time.kdv_dt,
    )
    problem, _ = _sweep_problem(config)
    snapshots = [_burst_snapshot(problem, asym, t)
                 for t in config.time.output_times]
    _write_snapshots(config, "simulate-kdv", snapshots, csv_path)
    say(f"wrote {len(snapshots)} composed snapshot(s) to {csv_path}")
    if svg_path:
        from .plotting import plot_profiles

        final = snapshots[-1]
        plot_profiles(svg_path, config.grid.nodes,
                      {"u": final.u, "v": final.v},
                      title=f"composed KdV asymptotics at t = {final.time:g}")
        say(f"wrote {svg_path}")


def _cmd_compare(config: ExperimentConfig, csv_path, svg_path, say):
    eps = config.require_epsilon()
    problem, mode = _sweep_problem(config)
    times = [t for t in config.time.output_times if t > 0]
    if not times:
        raise ValidationError("needs at least one positive output time",
                              field="time.output_times")
    delta = 1e-3 * eps.eps
    full_snaps = simulate_full(
        config.initial, config.grid, config.params, config.f, eps,
        _solver_config(config), output_times=times,
    )
    if mode is SweepMode.SMOOTH_REGULAR:
        eff = EffectiveParams.from_params(config.params)
        expansion = RegularExpansion(config.initial, config.params, config.f, eff.c)

        def approx_at(t):
            return _regular_snapshot(problem, expansion, t)
    else:
        probe = sorted({tp for t in times for tp in (t - delta, t, t + delta)})
        asym = build_burst_asymptotics(
            config.initial, config.params, config.f, eps, config.zeta_grid,
            t_end=times[-1] + delta, output_times=probe, dt=config.time.kdv_dt,
        )

        def approx_at(t):
            return _burst_snapshot(problem, asym, t)

    writer = _CsvWriter(config, "compare")
    writer.comment(f"mode = {mode.value}")
    writer.header(["t", "err_l2_u", "err_linf_u", "err_l2_v", "err_linf_v",
                   "pde_residual_linf"])
    rows = []
    for snap in full_snaps:
        t = snap.time
        norms = error_norms(snap, approx_at(t), config.grid)
        trio = [approx_at(t - delta), approx_at(t), approx_at(t + delta)]
        res_u, res_v = pde_residual(trio, config.grid, config.params, config.f, eps)
        residual = float(max(np.abs(res_u).max(), np.abs(res_v).max()))
        rows.append((t, norms.l2_u, norms.linf_u, norms.l2_v, norms.linf_v, residual))
        writer.row(rows[-1])
    writer.write(csv_path)
    say(f"wrote {len(rows)} comparison row(s) to {csv_path}")
    if svg_path:
        from .plotting import plot_time_series

        plot_time_series(
            svg_path, [r[0] for r in rows],
            {"err_linf_u": [r[2] for r in rows],
             "err_linf_v": [r[4] for r in rows]},
            title=f"full vs asymptotics, eps = {eps.eps:g}",
        )
        say(f"wrote {svg_path}")


def _cmd_sweep(config: ExperimentConfig, csv_path, svg_path, say):
    eps_list = config.require_epsilon_list()
    problem, mode = _sweep_problem(config)
    report = convergence_sweep(problem, eps_list, mode)

    writer = _CsvWriter(config, "sweep")
    writer.comment(f"mode = {mode.value}")
    writer.comment(f"fitted_order = {writer.fmt(report.fitted_order)}")
    writer.header(["eps", "err_l2_u", "err_linf_u", "err_l2_v", "err_linf_v",
                   "pde_residual_linf"])
    for row in report.rows:
        writer.row((row.eps, row.err_l2_u, row.err_linf_u, row.err_l2_v,
                    row.err_linf_v, row.pde_residual_linf))
    writer.write(csv_path)

    timings_path = csv_path + ".timings.txt"
    with open(timings_path, "w", newline="\n") as handle:
        for row in report.rows:
            handle.write(f"eps={row.eps:g} seconds={row.seconds:.3f}\n")
    say(f"wrote sweep summary to {csv_path} (timings in {timings_path})")
    say(f"fitted order: {report.fitted_order:.3f}")

    if svg_path:
        from .plotting import plot_error_curve

        plot_error_curve(
            svg_path, [r.eps for r in report.rows],
            {"err_linf_u": [r.err_linf_u for r in report.rows],
             "err_l2_u": [r.err_l2_u for r in report.rows]},
            report.fitted_order,
            title=f"{mode.value} convergence",
        )
        say(f"wrote {svg_path}")
    return report


def _cmd_verify_derivation(config: ExperimentConfig, csv_path, svg_path, say):
    residual = check_solvability(config.params)
    say(f"solvability residual: {residual:.3e}")
    relative = verify_order2_cancellation(config.params, config.f)
    say(f"order-2 cancellation residual (relative to scale): {relative:.3e}")
    say("derivation constants verified")


_COMMANDS = {
    "simulate-full": _cmd_simulate_full,
    "simulate-regular": _cmd_simulate_regular,
    "simulate-kdv": _cmd_simulate_kdv,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "verify-derivation": _cmd_verify_derivation,
}


def run_command(command: str, config: ExperimentConfig, out_dir: str | None = None,
                quiet: bool = False):
    """Execute one CLI command against a validated config."""
    if command not in _COMMANDS:
        raise ValidationError(f"unknown command {command!r}", field="command")

    def say(message: str) -> None:
        if not quiet:
            print(message)

    csv_path = _resolve(config.outputs.csv_path, out_dir)
    svg_path = _resolve(config.outputs.svg_path, out_dir)
    return _COMMANDS[command](config, csv_path, svg_path, say)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kdv-asymptotics",
        description="Stiff coupled-string solver with KdV/effective-wave "
                    "asymptotics and convergence verification.",
    )
    parser.add_argument("--version", action="version",
                        version=f"kdv-asymptotics {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to a JSON config")
        cmd.add_argument("--out-dir", default=None,
                         help="directory for relative output paths")
        cmd.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        try:
            with open(args.config) as handle:
                text = handle.read()
        except OSError as exc:
            raise ValidationError(str(exc), field="config") from None
        config = parse_config(text)
        if args.out_dir:
            os.makedirs(args.out_dir, exist_ok=True)
        run_command(args.command, config, out_dir=args.out_dir, quiet=args.quiet)
    except (ParseError, ValidationError) as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return 2
    except KdvAsymptoticsError as exc:
        print(f"error[numerical]: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
