"""
Horizontal gradient, divergence and the sub-Laplacian.
"""
from .flatness import FLAT_TOLERANCE, default_test_fields, flatness_scan
from .models import FlatnessReport, SamplingBox, ScalarField, VolumeForm
from .operators import horizontal_divergence, horizontal_gradient, sub_laplacian

__all__ = [
    "FLAT_TOLERANCE",
    "FlatnessReport",
    "SamplingBox",
    "ScalarField",
    "VolumeForm",
    "default_test_fields",
    "flatness_scan",
    "horizontal_divergence",
    "horizontal_gradient",
    "sub_laplacian",
]
