"""
Built-in systems and construction of systems from inline specifications.
"""
from typing import Callable, Dict, List, Sequence

from ..errors import ConfigError, UnknownSystem
from ..expr import ScalarExpr, constant, parse
from ..geometry.models import Chart, Frame, TamingMetric
from ..logger import logger
from ..metric.factory import MetricFactory
from ..metric.models import MetricKind, MetricSpec
from .models import Entry, System, SystemSpec


def _expr(entry: Entry, variables: Sequence[str]) -> ScalarExpr:
    if isinstance(entry, (int, float)):
        return constant(entry, variables)
    return parse(str(entry), variables)


def _frame(rows: Sequence[Sequence[Entry]], variables: Sequence[str]) -> Frame:
    return Frame(columns=[[_expr(c, variables) for c in row] for row in rows])


def build_system(spec: SystemSpec) -> System:
    """Parse every expression of an inline specification into a System."""
    names = spec.coordinate_names
    chart = Chart(coordinate_names=names, periodic=spec.periodic or ())
    frame = _frame(spec.frame, names)
    taming = TamingMetric(
        g=None if spec.taming is None else [[_expr(c, names) for c in row] for row in spec.taming]
    )
    metric = MetricFactory.create(spec.metric, names, frame.k)
    try:
        return System(
            name=spec.name,
            chart=chart,
            frame=frame,
            taming=taming,
            metric=metric,
            complement_scale=spec.complement_scale,
        )
    except ValueError as e:
        raise ConfigError(f"Invalid system {spec.name!r}: {e}") from e


def euclidean(dim: int = 3, **_) -> SystemSpec:
    rows = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    return SystemSpec(name=f"euclidean{dim}", dim=dim, frame=rows)


def heisenberg(**_) -> SystemSpec:
    return SystemSpec(
        name="heisenberg",
        dim=3,
        coordinates=["x", "y", "z"],
        frame=[[1, 0, "-y/2"], [0, 1, "x/2"]],
    )


def martinet(**_) -> SystemSpec:
    return SystemSpec(
        name="martinet",
        dim=3,
        coordinates=["x", "y", "z"],
        frame=[[1, 0, 0], [0, 1, "x^2/2"]],
    )


def _unicycle_metric(metric: str, alpha: float) -> MetricSpec:
    kind = MetricKind(metric)
    if kind == MetricKind.CUSTOM:
        raise ConfigError("The unicycle ships quadratic and curvature_weighted metrics only")
    return MetricSpec(type=kind, alpha=alpha)


def unicycle(metric: str = "quadratic", alpha: float = 3.0, **_) -> SystemSpec:
    # Order (phi, x1, x2, psi): X1 rolls forward, X2 turns in place
    return SystemSpec(
        name="unicycle",
        dim=4,
        coordinates=["phi", "x1", "x2", "psi"],
        periodic=[True, False, False, True],
        frame=[[0, "cos(phi)", "sin(phi)", 1], [1, 0, 0, 0]],
        metric=_unicycle_metric(metric, alpha),
    )


def unicycle_reduced(metric: str = "quadratic", alpha: float = 3.0, **_) -> SystemSpec:
    return SystemSpec(
        name="unicycle_reduced",
        dim=3,
        coordinates=["phi", "x1", "x2"],
        periodic=[True, False, False],
        frame=[[0, "cos(phi)", "sin(phi)"], [1, 0, 0]],
        metric=_unicycle_metric(metric, alpha),
    )


CATALOG: Dict[str, Callable[..., SystemSpec]] = {
    "euclidean": euclidean,
    "heisenberg": heisenberg,
    "martinet": martinet,
    "unicycle": unicycle,
    "unicycle_reduced": unicycle_reduced,
}

METRIC_OPTIONS: Dict[str, List[str]] = {
    "euclidean": ["quadratic"],
    "heisenberg": ["quadratic"],
    "martinet": ["quadratic"],
    "unicycle": ["quadratic", "curvature_weighted"],
    "unicycle_reduced": ["quadratic", "curvature_weighted"],
}


def system_spec(name: str, *, dim: int = 3, metric: str = "quadratic", alpha: float = 3.0) -> SystemSpec:
    builder = CATALOG.get(name)
    if builder is None:
        raise UnknownSystem(name)
    if metric not in METRIC_OPTIONS[name]:
        raise ConfigError(f"System {name!r} supports metrics {METRIC_OPTIONS[name]}, not {metric!r}")
    return builder(dim=dim, metric=metric, alpha=alpha)


def make_system(name: str, *, dim: int = 3, metric: str = "quadratic", alpha: float = 3.0) -> System:
    """
    Build a catalog system.

    Args:
        name: one of euclidean, heisenberg, martinet, unicycle, unicycle_reduced
        dim: dimension of the euclidean system
        metric: quadratic or curvature_weighted (unicycle variants)
        alpha: curvature weight

    Raises:
        UnknownSystem: for names outside the catalog
    """
    system = build_system(system_spec(name, dim=dim, metric=metric, alpha=alpha))
    logger.debug(f"Built system {system.name}: n={system.n}, k={system.k}, metric={system.metric.describe()}")
    return system


def catalog_entries() -> List[Dict[str, object]]:
    """Catalog listing with dimensions and metric options."""
    entries = []
    for name in CATALOG:
        spec = system_spec(name)
        entries.append(
            {
                "name": name,
                "n": spec.dim,
                "k": len(spec.frame),
                "coordinates": spec.coordinate_names,
                "metrics": METRIC_OPTIONS[name],
            }
        )
    return entries
