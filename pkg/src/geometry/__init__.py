"""
Charts, frames, Lie brackets, projections and metric extension.
"""
from .extension import (
    ComplementNorm,
    ExtendedMetric,
    extend_metric,
    extended_metric_tensor,
)
from .frame import (
    annihilator_basis,
    bracket,
    bracket_generating_step,
    frame_matrix,
    horizontal_residual,
    lie_bracket,
    lift_covector,
    orthogonal_complement_frame,
    projection_data,
    projection_derivative,
    projection_split,
)
from .models import Chart, Frame, ProjectionSplit, TamingMetric

__all__ = [
    "Chart",
    "ComplementNorm",
    "ExtendedMetric",
    "Frame",
    "ProjectionSplit",
    "TamingMetric",
    "annihilator_basis",
    "bracket",
    "bracket_generating_step",
    "extend_metric",
    "extended_metric_tensor",
    "frame_matrix",
    "horizontal_residual",
    "lie_bracket",
    "lift_covector",
    "orthogonal_complement_frame",
    "projection_data",
    "projection_derivative",
    "projection_split",
]
