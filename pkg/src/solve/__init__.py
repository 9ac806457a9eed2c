"""
Geodesic boundary-value solving, lengths, distances and variation checks.
"""
from .direct import DirectProblem, direct_solve, sampled_controls
from .models import DirectOptions, GeodesicResult, ShootingOptions
from .shooting import distance, endpoint_map, endpoint_map_batch, length, shoot
from .variation import ControlCurve, first_variation_residual

__all__ = [
    "ControlCurve",
    "DirectOptions",
    "DirectProblem",
    "GeodesicResult",
    "ShootingOptions",
    "direct_solve",
    "distance",
    "endpoint_map",
    "endpoint_map_batch",
    "first_variation_residual",
    "length",
    "sampled_controls",
    "shoot",
]
