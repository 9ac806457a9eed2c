"""
Construction of metrics from their specification blocks.
"""
from typing import Callable, Dict, Sequence

from ..errors import ConfigError
from ..expr import constant, parse
from .base import SubFinslerMetric
from .families import CurvatureWeightedMetric, CustomMetric, QuadraticMetric, fiber_names
from .models import MetricKind, MetricSpec


def _quadratic(spec: MetricSpec, coordinates: Sequence[str], rank: int) -> SubFinslerMetric:
    if spec.Q is None:
        rows = [[constant(1.0 if a == b else 0.0, coordinates) for b in range(rank)] for a in range(rank)]
        return QuadraticMetric(rows)
    if len(spec.Q) != rank or any(len(row) != rank for row in spec.Q):
        raise ConfigError(f"Quadratic metric Q must be {rank}×{rank}")
    rows = [
        [constant(v, coordinates) if isinstance(v, (int, float)) else parse(v, coordinates) for v in row]
        for row in spec.Q
    ]
    return QuadraticMetric(rows)


def _curvature_weighted(spec: MetricSpec, coordinates: Sequence[str], rank: int) -> SubFinslerMetric:
    if rank != 2:
        raise ConfigError(f"curvature_weighted metric needs rank 2, got {rank}")
    if spec.alpha < 1.0:
        raise ConfigError(f"curvature_weighted alpha must be at least 1, got {spec.alpha}")
    return CurvatureWeightedMetric(spec.alpha)


def _custom(spec: MetricSpec, coordinates: Sequence[str], rank: int) -> SubFinslerMetric:
    variables = list(coordinates) + fiber_names(rank)
    is_norm = spec.F is not None
    expression = parse(spec.F if is_norm else spec.F2, variables)
    return CustomMetric(expression, rank, len(coordinates), is_norm=is_norm)


class MetricFactory:
    """Factory for creating metrics from a MetricSpec."""

    _builders: Dict[MetricKind, Callable[[MetricSpec, Sequence[str], int], SubFinslerMetric]] = {
        MetricKind.QUADRATIC: _quadratic,
        MetricKind.CURVATURE_WEIGHTED: _curvature_weighted,
        MetricKind.CUSTOM: _custom,
    }

    @classmethod
    def create(cls, spec: MetricSpec, coordinates: Sequence[str], rank: int) -> SubFinslerMetric:
        """Create the metric for a chart with the given coordinate names and frame rank."""
        builder = cls._builders.get(spec.type)
        if not builder:
            raise ConfigError(f"Unsupported metric type: {spec.type}")
        return builder(spec, coordinates, rank)
