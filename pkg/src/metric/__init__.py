"""
Sub-Finsler metrics, Legendre transform and dual metric.
"""
from .base import SubFinslerMetric
from .factory import MetricFactory
from .families import CurvatureWeightedMetric, CustomMetric, QuadraticMetric, fiber_names
from .legendre import dual_metric, dual_metric_sup, legendre, legendre_inverse
from .models import AxiomCheck, MetricKind, MetricSpec, ValidationReport
from .validation import validate

__all__ = [
    "AxiomCheck",
    "CurvatureWeightedMetric",
    "CustomMetric",
    "MetricFactory",
    "MetricKind",
    "MetricSpec",
    "QuadraticMetric",
    "SubFinslerMetric",
    "ValidationReport",
    "dual_metric",
    "dual_metric_sup",
    "fiber_names",
    "legendre",
    "legendre_inverse",
    "validate",
]
