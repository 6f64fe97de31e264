"""Command-line entry point for the rotating trap toolkit.

CSV output starts with a one-line ``#`` header echoing the resolved
parameters, the package version and the column units; JSON output carries
the same information under a ``header`` key.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from pydantic import ValidationError

from rotating_trap import __version__
from rotating_trap.core import bifurcation, monte_carlo, optimizer
from rotating_trap.core.large_omega import composite_green, matching_h
from rotating_trap.core.models import InnerSolverParams, TrapConfig, WalkParams
from rotating_trap.core.reference_solutions import circle_exact, interval_exact
from rotating_trap.core.series_regime import field_grid
from rotating_trap.core.transition_regime import FluxTableBuilder
from rotating_trap.utils.config import Settings, config_manager, get_config
from rotating_trap.utils.errors import NumericalError, UsageError
from rotating_trap.utils.logger import configure_logging, get_audit_logger, get_logger

logger = get_logger("cli", {"component": "cli"})
audit = get_audit_logger("cli")

PROGRAM = "rotating-trap"


@dataclass
class CommandResult:
    """Output of one subcommand before formatting."""

    frame: Optional[pd.DataFrame] = None
    payload: Dict[str, Any] = field(default_factory=dict)
    units: Dict[str, str] = field(default_factory=dict)
    default_format: str = "csv"
    resolved: Dict[str, Any] = field(default_factory=dict)


def read_key_value_file(path: str) -> Dict[str, str]:
    """Parse a plain ``key = value`` file; ``#`` starts a comment."""
    if not Path(path).is_file():
        raise UsageError(f"config file not found: {path}")
    values: Dict[str, str] = {}
    for key, value in dotenv_values(path, interpolate=False).items():
        if value is None:
            raise UsageError(f"{path}: expected 'key = value' for {key!r}")
        values[key.replace("-", "_")] = value
    return values


def _walk_params(args: argparse.Namespace, dim: int) -> WalkParams:
    """Walk parameters from the flags, falling back to the configuration."""
    values = get_config().monte_carlo.model_dump()
    for name, flag in (
        ("space_step", args.space_step),
        ("n_agents", args.agents),
        ("seed", args.seed),
        ("max_steps", args.max_steps),
    ):
        if flag is not None:
            values[name] = flag
    space_step = values.pop("space_step")
    return WalkParams.for_diffusivity(space_step, args.diffusivity, dim=dim, **values)


def _walk_echo(params: WalkParams) -> Dict[str, Any]:
    return {
        "agents": params.n_agents,
        "block_steps": params.block_steps,
        "max_steps": params.max_steps,
        "seed": params.seed,
        "space_step": params.space_step,
        "time_step": params.time_step,
    }


def _stats_row(stats) -> Dict[str, Any]:
    return {
        "mean_fpt": stats.mean_fpt,
        "std_error": stats.std_error,
        "n_captured": stats.n_captured,
        "n_censored": stats.n_censored,
    }


def _simulate(args: argparse.Namespace) -> CommandResult:
    if args.geometry == "interval":
        params = _walk_params(args, dim=1)
        rows = []
        for index, x in enumerate(args.points or np.linspace(0.0, 1.0, 11)):
            stats = monte_carlo.mfpt_interval(x, args.trap, params, point=index)
            row = {"x": float(x), **_stats_row(stats)}
            row["exact"] = interval_exact(x, args.trap, args.diffusivity)
            rows.append(row)
        return CommandResult(
            frame=pd.DataFrame(rows),
            units={"x": "length", "mean_fpt": "time", "exact": "time"},
            resolved=_walk_echo(params),
        )

    if args.geometry == "circle":
        params = _walk_params(args, dim=1)
        default = np.linspace(0.0, 2.0 * math.pi, 9)[1:]
        rows = []
        for index, theta in enumerate(args.points or default):
            stats = monte_carlo.mfpt_circle(theta, args.omega, params, point=index)
            row = {"theta": float(theta), **_stats_row(stats)}
            row["exact"] = circle_exact(theta, args.omega, args.diffusivity)
            rows.append(row)
        return CommandResult(
            frame=pd.DataFrame(rows),
            units={"theta": "rad", "mean_fpt": "time", "exact": "time"},
            resolved=_walk_echo(params),
        )

    params = _walk_params(args, dim=2)
    cfg = TrapConfig(r0=args.r0, eps=args.eps, omega=args.omega)
    if args.average:
        stats = monte_carlo.domain_averaged_mfpt(cfg, params)
        payload = _stats_row(stats)
        payload["mass_estimate"] = math.pi * stats.mean_fpt
        return CommandResult(
            payload=payload, default_format="json", resolved=_walk_echo(params)
        )
    frame = monte_carlo.field_scan(monte_carlo.disk_grid(args.spacing), cfg, params)
    return CommandResult(
        frame=frame,
        units={"x": "length", "y": "length", "mean_fpt": "time"},
        resolved=_walk_echo(params),
    )


def _field(args: argparse.Namespace) -> CommandResult:
    cfg = TrapConfig(r0=args.r0, eps=args.eps, omega=args.omega)
    radii = np.linspace(0.0, 1.0, args.radii)
    angles = np.linspace(0.0, 2.0 * math.pi, args.angles, endpoint=False)
    if args.regime == "series":
        frame = field_grid(radii, angles, cfg)
    else:
        rr, tt = np.meshgrid(radii, angles, indexing="ij")
        rr, tt = rr.ravel(), tt.ravel()
        distance = np.sqrt(rr**2 + cfg.r0**2 - 2.0 * rr * cfg.r0 * np.cos(tt))
        outside = distance >= cfg.eps
        u = np.full(rr.shape, np.nan)
        u[outside] = -math.pi * composite_green(
            rr[outside], tt[outside], cfg.r0, cfg.omega
        ) + matching_h(cfg)
        frame = pd.DataFrame({"r": rr, "theta": tt, "u": u})
    return CommandResult(frame=frame, units={"r": "length", "theta": "rad"})


def _mass_curve(args: argparse.Namespace) -> CommandResult:
    cfg = TrapConfig(r0=0.0, eps=args.eps, omega=args.omega)
    grid = np.linspace(0.0, 1.0 - args.eps - 1e-6, args.points)
    curve = optimizer.mass_curve(cfg, grid if args.points else None)
    frame = pd.DataFrame({"r0": curve.r0_samples, "mass": curve.mass_values})
    return CommandResult(
        frame=frame,
        payload={
            "regime": curve.regime_tag.value,
            "local_minima": curve.local_minima,
        },
        units={"r0": "length", "mass": "area x time"},
    )


def _optimum_row(result) -> Dict[str, Any]:
    return {
        "omega": result.omega,
        "speed": result.speed,
        "eps": result.eps,
        "r0_opt": result.r0_opt,
        "mass": result.mass_at_opt,
        "regime": result.regime_tag.value,
        "competing_minima": result.competing_minima,
    }


def _optimum(args: argparse.Namespace) -> CommandResult:
    if len(args.omega) == 1:
        result = optimizer.optimal_radius(args.omega[0], args.eps)
        return CommandResult(payload=_optimum_row(result), default_format="json")
    results = optimizer.optimal_radius_curve(args.omega, args.eps)
    frame = pd.DataFrame(
        {
            "omega": [r.omega for r in results],
            "r0_opt": [r.r0_opt for r in results],
            "mass": [r.mass_at_opt for r in results],
            "regime": [r.regime_tag.value for r in results],
            "n_minima": [len(r.competing_minima) + 1 for r in results],
        }
    )
    return CommandResult(
        frame=frame,
        payload={"exchanges": optimizer.exchange_points(results)},
        units={"omega": "1/time", "r0_opt": "length"},
    )


def _bifurcation(args: argparse.Namespace) -> CommandResult:
    omega_c = bifurcation.critical_omega(tuple(args.bracket), args.tol)
    return CommandResult(
        payload={"omega_c": omega_c, "a2_at_root": bifurcation.a2(omega_c)},
        default_format="json",
    )


def _u0_table(args: argparse.Namespace) -> CommandResult:
    section = get_config().inner_solver
    grid = np.geomspace(
        args.s0_min or section.s0_min,
        args.s0_max or section.s0_max,
        args.s0_count or section.s0_count,
    )
    params = InnerSolverParams(
        n_nodes=args.nodes or section.n_nodes,
        s0_grid=tuple(grid.tolist()),
        nodes_per_s0=section.nodes_per_s0,
        deriv_tol=section.deriv_tol,
    )
    table = FluxTableBuilder(params, get_config().runtime.threads).build()
    frame = pd.DataFrame(
        {
            "s0": table.s0,
            "u0": table.u0,
            "u0_prime": table.u0_prime,
            "n_nodes": table.n_nodes,
        }
    )
    return CommandResult(
        frame=frame,
        units={"s0": "dimensionless"},
        resolved={
            "nodes": params.n_nodes,
            "s0_count": grid.size,
            "s0_max": float(grid[-1]),
            "s0_min": float(grid[0]),
        },
    )


def _speed_curve(args: argparse.Namespace) -> CommandResult:
    speeds = args.speeds or np.linspace(
        args.speed_min, args.speed_max, args.speed_count
    )
    results = optimizer.optimal_radius_vs_speed(speeds, args.eps)
    frame = pd.DataFrame(
        {
            "speed": [r.speed for r in results],
            "r0_opt": [r.r0_opt for r in results],
            "mass": [r.mass_at_opt for r in results],
            "regime": [r.regime_tag.value for r in results],
        }
    )
    return CommandResult(
        frame=frame,
        payload={"exchanges": optimizer.exchange_points(results)},
        units={"speed": "length/time", "r0_opt": "length"},
    )


def _mass(args: argparse.Namespace) -> CommandResult:
    cfg = TrapConfig(r0=args.r0, eps=args.eps, omega=args.omega)
    value, tag = optimizer.mass(cfg)
    return CommandResult(
        payload={"mass": value, "regime": tag.value}, default_format="json"
    )


Handler = Callable[[argparse.Namespace], CommandResult]


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--output", type=str, default=None, help="Output file")
    common.add_argument("--config", type=str, default=None, help="key = value file")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    return common


def _trap_options(parser: argparse.ArgumentParser, r0: bool = True) -> None:
    if r0:
        parser.add_argument("--r0", type=float, required=True)
    parser.add_argument("--omega", type=float, required=True)
    parser.add_argument("--eps", type=float, required=True)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog=PROGRAM,
        description="Mean first passage times for a rotating trap",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common])
    simulate.add_argument("geometry", choices=["interval", "circle", "disk"])
    simulate.add_argument("--points", type=float, nargs="+", default=None)
    simulate.add_argument("--trap", type=float, default=0.5)
    simulate.add_argument("--r0", type=float, default=0.6)
    simulate.add_argument("--omega", type=float, default=0.0)
    simulate.add_argument("--eps", type=float, default=0.1)
    simulate.add_argument("--diffusivity", type=float, default=1.0)
    simulate.add_argument("--space-step", type=float, default=None)
    simulate.add_argument("--agents", type=int, default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--max-steps", type=int, default=None)
    simulate.add_argument("--spacing", type=float, default=0.1)
    simulate.add_argument("--average", action="store_true")
    simulate.set_defaults(handler=_simulate)

    field_cmd = commands.add_parser("field", parents=[common])
    _trap_options(field_cmd)
    field_cmd.add_argument(
        "--regime", choices=["series", "large-omega"], default="series"
    )
    field_cmd.add_argument("--radii", type=int, default=41)
    field_cmd.add_argument("--angles", type=int, default=72)
    field_cmd.set_defaults(handler=_field)

    curve = commands.add_parser("mass-curve", parents=[common])
    _trap_options(curve, r0=False)
    curve.add_argument("--points", type=int, default=0)
    curve.set_defaults(handler=_mass_curve)

    optimum = commands.add_parser("optimum", parents=[common])
    optimum.add_argument("--omega", type=float, nargs="+", required=True)
    optimum.add_argument("--eps", type=float, required=True)
    optimum.set_defaults(handler=_optimum)

    bif = commands.add_parser("bifurcation", parents=[common])
    bif.add_argument("--bracket", type=float, nargs=2, default=[2.0, 4.0])
    bif.add_argument("--tol", type=float, default=1e-10)
    bif.set_defaults(handler=_bifurcation)

    table = commands.add_parser("u0-table", parents=[common])
    table.add_argument("--nodes", type=int, default=None)
    table.add_argument("--s0-min", type=float, default=None)
    table.add_argument("--s0-max", type=float, default=None)
    table.add_argument("--s0-count", type=int, default=None)
    table.set_defaults(handler=_u0_table)

    speed = commands.add_parser("speed-curve", parents=[common])
    speed.add_argument("--eps", type=float, required=True)
    speed.add_argument("--speeds", type=float, nargs="+", default=None)
    speed.add_argument("--speed-min", type=float, default=1.0)
    speed.add_argument("--speed-max", type=float, default=60.0)
    speed.add_argument("--speed-count", type=int, default=60)
    speed.set_defaults(handler=_speed_curve)

    scalar = commands.add_parser("mass", parents=[common])
    _trap_options(scalar)
    scalar.set_defaults(handler=_mass)

    return parser


def _subcommands(parser: argparse.ArgumentParser) -> argparse._SubParsersAction:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action
    raise UsageError("parser has no subcommands")


def _coerce(action: argparse.Action, value: str) -> Any:
    """Turn a file value into what the flag would have produced."""
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes", "on")
    if action.nargs in ("+", "*") or isinstance(action.nargs, int):
        convert = action.type or str
        return [convert(item) for item in value.replace(",", " ").split()]
    return value


def parse_arguments(
    argv: Sequence[str],
) -> Tuple[argparse.Namespace, Dict[str, str]]:
    """Parse argv with flags taking precedence over a key = value file.

    Plain keys act as flag defaults of the chosen subcommand, so a file may
    supply required flags. Dotted ``section.key`` entries are returned as
    configuration overrides.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if not known.config:
        return parser.parse_args(argv), {}

    file_values = read_key_value_file(known.config)
    overrides = {k: v for k, v in file_values.items() if "." in k}
    defaults = {k: v for k, v in file_values.items() if "." not in k}
    commands = _subcommands(parser)
    command = next((token for token in argv if token in commands.choices), None)
    if command is None:
        # argparse reports the missing subcommand
        return parser.parse_args(argv), overrides
    sub = commands.choices[command]
    actions = {action.dest: action for action in sub._actions}
    unknown = sorted(set(defaults) - set(actions))
    if unknown:
        raise UsageError(f"unknown keys in {known.config}: {', '.join(unknown)}")
    for dest, value in defaults.items():
        actions[dest].required = False
        sub.set_defaults(**{dest: _coerce(actions[dest], value)})
    return parser.parse_args(argv), overrides


def _resolve_settings(args: argparse.Namespace, overrides: Dict[str, str]):
    if args.threads is not None:
        overrides["runtime.threads"] = str(args.threads)
    if not overrides:
        return get_config()
    try:
        return config_manager.apply_overrides(overrides)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc


COMMAND_SECTIONS: Dict[str, Tuple[str, ...]] = {
    "simulate": ("monte_carlo",),
    "field": ("series", "dispatch"),
    "mass": ("series", "inner_solver", "dispatch", "runtime"),
    "mass-curve": ("series", "inner_solver", "dispatch", "runtime"),
    "optimum": ("series", "inner_solver", "dispatch", "runtime"),
    "speed-curve": ("series", "inner_solver", "dispatch", "runtime"),
    "u0-table": ("inner_solver", "runtime"),
    "bifurcation": (),
}


def resolved_parameters(
    args: argparse.Namespace,
    overrides: Dict[str, str],
    settings: Optional[Settings] = None,
    resolved: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Every value that shaped one run, sorted by key.

    Flags left unset are dropped; the configuration sections the command
    reads appear as ``section.key``, and values the handler settled on
    (walk steps, table grid) replace the flags they came from.
    """
    echo = {
        key: value
        for key, value in vars(args).items()
        if key not in ("handler", "command") and value is not None
    }
    if settings is not None:
        for section in COMMAND_SECTIONS.get(args.command, ()):
            for key, value in getattr(settings, section).model_dump().items():
                echo[f"{section}.{key}"] = value
    echo.update(overrides)
    echo.update(resolved or {})
    return dict(sorted(echo.items()))


def _header(command: str, echo: Dict[str, Any], result: CommandResult) -> str:
    parts = [f"{PROGRAM} {__version__}", command]
    parts.append(" ".join(f"{key}={value}" for key, value in echo.items()))
    if result.frame is not None:
        columns = [
            f"{name}[{result.units[name]}]" if name in result.units else name
            for name in result.frame.columns
        ]
        parts.append("columns: " + ",".join(columns))
    return "# " + " | ".join(parts)


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    return value


def write_result(
    stream: TextIO,
    command: str,
    echo: Dict[str, Any],
    result: CommandResult,
) -> None:
    """Write the result; JSON carries the header as a field instead of a line."""
    output_format = echo.get("format") or result.default_format
    if output_format == "json":
        document = dict(result.payload)
        document["header"] = {
            "program": PROGRAM,
            "version": __version__,
            "command": command,
            "parameters": {key: str(value) for key, value in echo.items()},
        }
        if result.frame is not None:
            document["rows"] = result.frame.to_dict(orient="records")
        stream.write(json.dumps(_jsonable(document), indent=2, sort_keys=True))
        stream.write("\n")
        return
    stream.write(_header(command, echo, result) + "\n")
    frame = result.frame
    if frame is None:
        frame = pd.DataFrame([_jsonable(result.payload)])
    frame.to_csv(stream, index=False, float_format="%.12g", lineterminator="\n")


def run_command(
    argv: Sequence[str],
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run one subcommand; returns 0, 1 for numerical errors, 2 for usage errors."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args, overrides = parse_arguments(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        stderr.write(f"{PROGRAM}: usage error: {exc}\n")
        return 2

    try:
        settings = _resolve_settings(args, overrides)
        configure_logging(
            level=settings.logging.level,
            format_type=settings.logging.format,
            log_file=settings.logging.file,
        )
        audit.log_run_parameters(
            args.command, resolved_parameters(args, overrides, settings)
        )
        result = args.handler(args)
    except (UsageError, ValidationError) as exc:
        stderr.write(f"{PROGRAM}: usage error: {exc}\n")
        return 2
    except NumericalError as exc:
        logger.error("Numerical failure", command=args.command, error=str(exc))
        stderr.write(f"{PROGRAM}: {type(exc).__name__}: {exc}\n")
        return 1

    echo = resolved_parameters(args, overrides, settings, result.resolved)
    if args.output:
        with open(args.output, "w", newline="") as handle:
            write_result(handle, args.command, echo, result)
    else:
        write_result(stdout, args.command, echo, result)
    return 0


def main() -> None:
    """Console script entry point."""
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
