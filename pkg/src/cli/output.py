"""
Result serialization: trajectory and certificate CSV, JSON summaries, gnuplot scripts.
"""
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from ..dynamics.models import Trajectory
from ..errors import ConfigError
from ..nonholonomic.models import AnnihilatorSection

CSV_FORMAT = "%.17g"
TEMPLATES_DIR = Path(__file__).parent / "templates"

_templates = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
)


def trajectory_columns(n: int, k: int) -> List[str]:
    return (
        ["t"]
        + [f"x{i + 1}" for i in range(n)]
        + [f"p{i + 1}" for i in range(n)]
        + [f"u{i + 1}" for i in range(k)]
        + ["eta", "F_speed", "horiz_residual"]
    )


def trajectory_table(trajectory: Trajectory) -> np.ndarray:
    return np.column_stack(
        [
            trajectory.times,
            trajectory.xs,
            trajectory.ps,
            trajectory.controls,
            trajectory.eta,
            trajectory.speed,
            trajectory.horizontality,
        ]
    )


def write_trajectory_csv(target: Union[str, Path, TextIO], trajectory: Trajectory) -> None:
    """Columns t, x1..xn, p1..pn, u1..uk, eta, F_speed, horiz_residual at full precision."""
    header = ",".join(trajectory_columns(trajectory.n, trajectory.k))
    np.savetxt(target, trajectory_table(trajectory), fmt=CSV_FORMAT, delimiter=",", header=header, comments="")


def trajectory_csv(trajectory: Trajectory) -> str:
    buffer = io.StringIO()
    write_trajectory_csv(buffer, trajectory)
    return buffer.getvalue()


def _count(columns: List[str], prefix: str) -> int:
    return sum(1 for c in columns if c.startswith(prefix) and c[len(prefix):].isdigit())


def read_trajectory_csv(path: Union[str, Path], system=None) -> Trajectory:
    """
    Load a trajectory written by ``write_trajectory_csv``.

    Velocities are not stored: with a system they are rebuilt as X(x)u,
    otherwise estimated by differencing the base points.

    Raises:
        ConfigError: when the file does not follow the column schema
    """
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as f:
            header = f.readline().strip().split(",")
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read trajectory {path}: {e}") from e
    n, k = _count(header, "x"), _count(header, "u")
    if header != trajectory_columns(n, k) or table.shape[1] != len(header):
        raise ConfigError(f"Trajectory {path} does not follow the column schema")
    times = table[:, 0]
    xs = table[:, 1:1 + n]
    ps = table[:, 1 + n:1 + 2 * n]
    controls = table[:, 1 + 2 * n:1 + 2 * n + k]
    eta, speed, horizontality = table[:, -3], table[:, -2], table[:, -1]
    if system is not None:
        velocities = np.array([system.frame.matrix(x) @ u for x, u in zip(xs, controls)])
    elif len(times) > 1:
        velocities = np.gradient(xs, times, axis=0)
    else:
        velocities = np.zeros_like(xs)
    drift = float(np.max(np.abs(eta - eta[0])))
    return Trajectory(
        times=times,
        xs=xs,
        ps=ps,
        controls=controls,
        velocities=velocities,
        eta=eta,
        speed=speed,
        horizontality=horizontality,
        max_eta_drift=drift,
    )


def write_certificate_csv(
    target: Union[str, Path, TextIO], section: AnnihilatorSection, extra: Optional[Dict[str, Any]] = None
) -> None:
    """Columns t, gamma1..gamman under a one-line JSON header of residual norms."""
    meta = {
        "residual": section.residual,
        "annihilation": section.annihilation,
        "ode_residual": section.ode_residual,
    }
    meta.update(extra or {})
    columns = ["t"] + [f"gamma{i + 1}" for i in range(section.samples.shape[1])]
    header = "# " + json.dumps(meta, sort_keys=True) + "\n" + ",".join(columns)
    table = np.column_stack([section.times, section.samples])
    np.savetxt(target, table, fmt=CSV_FORMAT, delimiter=",", header=header, comments="")


def read_certificate_csv(path: Union[str, Path]) -> tuple:
    """(header dict, times, covectors)."""
    path = Path(path)
    with path.open(encoding="utf-8") as f:
        meta = json.loads(f.readline()[1:])
    table = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    return meta, table[:, 0], table[:, 1:]


def to_json(data: Any) -> str:
    """Deterministic JSON: sorted keys, numpy scalars and arrays converted."""

    def default(value):
        if isinstance(value, np.ndarray):
            return value.tolist()
        if isinstance(value, np.generic):
            return value.item()
        if isinstance(value, Path):
            return str(value)
        raise TypeError(f"Cannot serialize {type(value).__name__}")

    return json.dumps(data, indent=2, sort_keys=True, default=default)


def render_plot_script(trajectory: Trajectory, data_file: Union[str, Path], title: str, coordinates: List[str]) -> str:
    """gnuplot script drawing the base curve from a trajectory CSV."""
    columns = trajectory_columns(trajectory.n, trajectory.k)
    axes = [{"name": name, "column": columns.index(f"x{i + 1}") + 1} for i, name in enumerate(coordinates)]
    template = _templates.get_template("trajectory.gp.j2")
    return template.render(
        title=title,
        data_file=str(data_file),
        axes=axes[:3],
        speed_column=columns.index("F_speed") + 1,
        eta_column=columns.index("eta") + 1,
    )


def format_flatness(report) -> str:
    """Plain-text table of a flatness scan."""
    template = _templates.get_template("flatness.txt.j2")
    rows = []
    for name, values in zip(report.fields, report.values):
        finite = values[np.isfinite(values)]
        worst = float(np.max(np.abs(finite))) if finite.size else float("nan")
        rows.append({"field": name, "max_abs": worst})
    return template.render(report=report, rows=rows)
