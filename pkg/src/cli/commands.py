"""
Command handlers and the dispatcher mapping errors to exit codes.
"""
import argparse
import asyncio
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sqlalchemy.exc import SQLAlchemyError

from ..config import settings
from ..dynamics import ExtremalState, Trajectory, flow, geodesic_invariance_check, horizontal_curve
from ..errors import ConfigError, NotGenerating, SubFinslerError
from ..expr import parse
from ..geometry import bracket_generating_step
from ..laplacian import SamplingBox, ScalarField, VolumeForm, default_test_fields, flatness_scan, sub_laplacian
from ..logger import logger
from ..metric import validate
from ..nonholonomic import abnormal_check, normal_connection_check, vakonomic_comparison
from ..solve import direct_solve, distance, first_variation_residual, shoot
from ..storage import DatabaseManager
from ..systems import System, catalog_entries
from .models import Command, Config
from .output import (
    format_flatness,
    read_trajectory_csv,
    render_plot_script,
    to_json,
    trajectory_csv,
    write_certificate_csv,
    write_trajectory_csv,
)

CRITICAL_TOL = 1e-4


@dataclass
class CommandResult:
    """Primary stdout text plus the JSON-ready summary kept in the run ledger."""

    stdout: str
    summary: Dict[str, Any] = field(default_factory=dict)


@dataclass
class RunContext:
    config: Config
    args: argparse.Namespace
    system: System

    def arg(self, name: str, default: Any = None) -> Any:
        value = getattr(self.args, name, None)
        return default if value is None else value


def parse_vector(text: Optional[str], size: int, label: str) -> Optional[np.ndarray]:
    """Comma-separated floats of the given length."""
    if text is None:
        return None
    try:
        values = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError as e:
        raise ConfigError(f"--{label} expects comma-separated numbers, got {text!r}") from e
    if len(values) != size:
        raise ConfigError(f"--{label} needs {size} entries, got {len(values)}")
    return values


FLAGS = {"source": "from", "target": "to"}


def _point(ctx: RunContext, name: str, size: Optional[int] = None, required: bool = True) -> Optional[np.ndarray]:
    flag = FLAGS.get(name, name.replace("_", "-"))
    value = parse_vector(getattr(ctx.args, name, None), ctx.system.n if size is None else size, flag)
    if value is None and required:
        raise ConfigError(f"Command needs --{flag}")
    return value


def _shooting_options(ctx: RunContext):
    update = {"rng_seed": ctx.arg("seed", ctx.config.shooting.rng_seed)}
    if ctx.arg("threads") is not None:
        update["threads"] = ctx.args.threads
    return ctx.config.shooting.model_copy(update=update)


def _flow_options(ctx: RunContext):
    update = {}
    if ctx.arg("method"):
        update["method"] = ctx.args.method
    if ctx.arg("dt"):
        update["dt"] = ctx.args.dt
    return ctx.config.flow.model_copy(update=update)


def _write_trajectory(ctx: RunContext, trajectory: Trajectory, title: str) -> Optional[Path]:
    """Write the trajectory CSV (and plot script) when a path is configured."""
    path = ctx.config.output.trajectory
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(path, trajectory)
    plot = ctx.config.output.plot
    if plot is not None:
        plot.parent.mkdir(parents=True, exist_ok=True)
        plot.write_text(
            render_plot_script(trajectory, path, title, list(ctx.system.coordinate_names)), encoding="utf-8"
        )
    logger.info(f"Wrote trajectory to {path}")
    return path


def _curve(ctx: RunContext) -> Tuple[Trajectory, str]:
    """
    The curve a diagnostic runs on, from the first available source:
    a trajectory CSV, a constant-control horizontal curve, a flow, or a shot geodesic.
    """
    system = ctx.system
    if ctx.arg("trajectory"):
        return read_trajectory_csv(ctx.args.trajectory, system), "file"
    x0 = _point(ctx, "source")
    T = ctx.arg("T", 1.0)
    if ctx.arg("controls"):
        u = parse_vector(ctx.args.controls, system.k, "controls")
        return horizontal_curve(system, x0, lambda _t: u, T, _flow_options(ctx)), "controls"
    if ctx.arg("momentum"):
        p0 = parse_vector(ctx.args.momentum, system.n, "momentum")
        return flow(system, ExtremalState(x=x0, p=p0), T, _flow_options(ctx)), "flow"
    x1 = _point(ctx, "target")
    return shoot(system, x0, x1, _shooting_options(ctx)).trajectory, "geodesic"


# Commands

def cmd_validate(ctx: RunContext) -> CommandResult:
    system = ctx.system
    report = validate(system.metric, system, ctx.arg("samples", settings.validation_samples), ctx.arg("seed", 0))
    summary = {"metric": system.metric.describe(), "passed": report.passed, **report.model_dump(mode="json")}
    return CommandResult(to_json(summary), summary)


def cmd_brackets(ctx: RunContext) -> CommandResult:
    at = _point(ctx, "at", required=False)
    at = np.zeros(ctx.system.n) if at is None else at
    depth = ctx.arg("max_depth", ctx.system.n)
    summary = {"at": at.tolist(), "max_depth": depth}
    try:
        summary.update(step=bracket_generating_step(ctx.system, at, depth), generating=True)
    except NotGenerating as e:
        summary.update(step=None, generating=False, rank=e.rank)
    return CommandResult(to_json(summary), summary)


def cmd_flow(ctx: RunContext) -> CommandResult:
    x0 = _point(ctx, "source")
    p0 = _point(ctx, "momentum")
    trajectory = flow(ctx.system, ExtremalState(x=x0, p=p0), ctx.arg("T", 1.0), _flow_options(ctx))
    summary = {
        "samples": len(trajectory.times),
        "end": trajectory.xs[-1].tolist(),
        "eta": float(trajectory.eta[0]),
        "max_eta_drift": trajectory.max_eta_drift,
        "conserved": trajectory.conserved,
        "max_horizontal_residual": float(trajectory.horizontality.max()),
    }
    if _write_trajectory(ctx, trajectory, f"{ctx.system.name} flow") is None:
        return CommandResult(trajectory_csv(trajectory).rstrip("\n"), summary)
    return CommandResult(to_json(summary), summary)


def cmd_shoot(ctx: RunContext) -> CommandResult:
    result = shoot(ctx.system, _point(ctx, "source"), _point(ctx, "target"), _shooting_options(ctx))
    _write_trajectory(ctx, result.trajectory, f"{ctx.system.name} geodesic")
    summary = result.summary()
    return CommandResult(to_json(summary), summary)


def cmd_distance(ctx: RunContext) -> CommandResult:
    x0, x1 = _point(ctx, "source"), _point(ctx, "target")
    if ctx.arg("direct"):
        options = ctx.config.direct.model_copy(update={"rng_seed": ctx.arg("seed", ctx.config.direct.rng_seed)})
        cost, _ = direct_solve(ctx.system, x0, x1, options.N, options)
        return CommandResult(f"{cost:.6f}", {"distance": cost, "method": "direct"})
    value, result = distance(ctx.system, x0, x1, _shooting_options(ctx))
    return CommandResult(f"{value:.6f}", result.summary(value))


def cmd_variation(ctx: RunContext) -> CommandResult:
    trajectory, _ = _curve(ctx)
    residual = first_variation_residual(
        ctx.system, trajectory, ctx.arg("variations", 8), ctx.arg("seed", 0)
    )
    summary = {"residual": residual, "critical": residual <= CRITICAL_TOL, "tolerance": CRITICAL_TOL}
    return CommandResult(to_json(summary), summary)


def cmd_classify(ctx: RunContext) -> CommandResult:
    trajectory, _ = _curve(ctx)
    tol = ctx.arg("tol", 1e-6)
    section = abnormal_check(ctx.system, trajectory, tol)
    summary: Dict[str, Any] = {"abnormal": section is not None, "tolerance": tol}
    if section is not None:
        summary.update(
            residual=section.residual,
            annihilation=section.annihilation,
            gamma0=section.samples[0].tolist(),
            kernel_dimension=section.kernel_dimension,
        )
        _write_certificate(ctx, section, {"kind": "abnormal", "system": ctx.system.name})
    return CommandResult(to_json(summary), summary)


def _write_certificate(ctx: RunContext, section, extra: Dict[str, Any]) -> None:
    path = ctx.config.output.certificate
    if path is None:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    write_certificate_csv(path, section, extra)
    logger.info(f"Wrote certificate to {path}")


def cmd_vakonomic(ctx: RunContext) -> CommandResult:
    trajectory, source = _curve(ctx)
    tol = ctx.arg("tol", 1e-6)
    section = vakonomic_comparison(ctx.system, trajectory, tol)
    summary: Dict[str, Any] = {"vakonomic": section is not None, "tolerance": tol}
    if section is not None:
        summary.update(
            residual=section.residual,
            ode_residual=section.ode_residual,
            gamma0=section.samples[0].tolist(),
        )
        _write_certificate(ctx, section, {"kind": "vakonomic", "system": ctx.system.name})
    if source in ("flow", "geodesic"):
        report = normal_connection_check(ctx.system, trajectory)
        summary["normal_connection"] = report.model_dump()
    return CommandResult(to_json(summary), summary)


def _test_fields(ctx: RunContext) -> List[ScalarField]:
    sources = ctx.arg("field") or []
    if not sources:
        return default_test_fields(ctx.system)
    names = list(ctx.system.coordinate_names)
    return [ScalarField(h=parse(s, names), label=s) for s in sources]


def cmd_laplacian(ctx: RunContext) -> CommandResult:
    system = ctx.system
    fields = _test_fields(ctx)
    volume = VolumeForm(ctx.arg("volume", VolumeForm.LEBESGUE.value))
    at = _point(ctx, "at", required=False)
    if at is not None:
        values = {f.name: sub_laplacian(system, f, at, volume) for f in fields}
        summary = {"at": at.tolist(), "values": values}
        return CommandResult(to_json(summary), summary)
    half_width = ctx.arg("half_width", settings.sampling_half_width)
    report = flatness_scan(
        system,
        fields,
        SamplingBox.centered(system.n, half_width),
        ctx.arg("samples", settings.validation_samples),
        ctx.arg("seed", 0),
        volume,
        ctx.arg("threads"),
    )
    summary = {"max_abs": report.max_abs, "flat": report.flat, "skipped": report.skipped}
    text = format_flatness(report) if ctx.arg("pretty") else to_json(report.to_table())
    return CommandResult(text.rstrip("\n"), summary)


def cmd_invariance(ctx: RunContext) -> CommandResult:
    system = ctx.system
    x0 = _point(ctx, "source")
    v0 = _point(ctx, "velocity", required=False)
    if v0 is None:
        v0 = system.frame.matrix(x0)[:, 0]
    residual = geodesic_invariance_check(system, x0, v0, ctx.arg("T", 1.0), ctx.arg("dt"))
    summary = {"max_residual": residual, "v0": v0.tolist()}
    return CommandResult(to_json(summary), summary)


def cmd_systems(ctx: RunContext) -> CommandResult:
    entries = catalog_entries()
    return CommandResult(to_json(entries), {"count": len(entries)})


def cmd_history(ctx: RunContext) -> CommandResult:
    async def fetch():
        db = DatabaseManager(database_url=settings.database_url)
        try:
            await db.init_db()
            runs = await db.recent_runs(command=ctx.arg("only"), limit=ctx.arg("limit", 20))
            return [r.to_dict() for r in runs]
        finally:
            await db.close()

    try:
        runs = asyncio.run(fetch())
    except SQLAlchemyError as e:
        raise ConfigError(f"Cannot read run ledger at {settings.database_url}: {e}") from e
    return CommandResult(to_json(runs), {"count": len(runs)})


COMMANDS: Dict[Command, Callable[[RunContext], CommandResult]] = {
    Command.VALIDATE: cmd_validate,
    Command.BRACKETS: cmd_brackets,
    Command.FLOW: cmd_flow,
    Command.SHOOT: cmd_shoot,
    Command.DISTANCE: cmd_distance,
    Command.VARIATION: cmd_variation,
    Command.CLASSIFY: cmd_classify,
    Command.VAKONOMIC: cmd_vakonomic,
    Command.LAPLACIAN: cmd_laplacian,
    Command.INVARIANCE: cmd_invariance,
    Command.SYSTEMS: cmd_systems,
    Command.HISTORY: cmd_history,
}


def report_error(error: SubFinslerError) -> int:
    """Write the machine-readable error to stderr and return its exit code."""
    print(json.dumps(error.to_dict(), sort_keys=True), file=sys.stderr)
    return error.exit_code


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: (str(value) if isinstance(value, Path) else value) for key, value in sorted(vars(args).items())}


def record(command: Command, config: Config, args: argparse.Namespace, exit_code: int,
           summary: Dict[str, Any], error: Optional[str], duration: float) -> None:
    """Append the run to the ledger; ledger failures never change the outcome."""

    async def store():
        db = DatabaseManager(database_url=settings.database_url)
        try:
            await db.init_db()
            await db.record_run(
                command=command.value,
                system=config.system_name,
                arguments=_arguments(args),
                seed=getattr(args, "seed", None),
                exit_code=exit_code,
                summary=json.loads(to_json(summary)),
                error_message=error,
                duration=duration,
            )
        finally:
            await db.close()

    try:
        asyncio.run(store())
    except (SQLAlchemyError, OSError) as e:
        logger.warning(f"Could not record run: {e}")


def run(command: Command, config: Config, args: argparse.Namespace) -> int:
    """
    Execute one command.

    Returns:
        0 on success, 1 on computational failure, 2 on configuration errors
    """
    command = Command(command)
    ctx = RunContext(config=config, args=args, system=config.build())
    started = time.perf_counter()
    summary: Dict[str, Any] = {}
    error: Optional[str] = None
    try:
        result = COMMANDS[command](ctx)
    except SubFinslerError as e:
        exit_code = report_error(e)
        error = str(e)
    else:
        print(result.stdout)
        summary = result.summary
        exit_code = 0
    duration = time.perf_counter() - started
    logger.debug(f"{command.value} finished with exit code {exit_code} in {duration:.3f}s")
    if command != Command.HISTORY and (getattr(args, "record", False) or settings.record_runs):
        record(command, config, args, exit_code, summary, error, duration)
    return exit_code
