"""
Sub-Hamiltonian dynamics, flows and the Barthel connection of the extended metric.
"""
from .barthel import (
    barthel,
    barthel_geodesic,
    barthel_transport,
    christoffel,
    geodesic_invariance_check,
    spray,
)
from .flow import curve_interpolant, flow, horizontal_curve
from .hamiltonian import SubHamiltonian, anchor_E, eta, hamiltonian_vector_field
from .models import BarthelData, ExtremalState, FlowOptions, IntegratorKind, Trajectory

__all__ = [
    "BarthelData",
    "ExtremalState",
    "FlowOptions",
    "IntegratorKind",
    "SubHamiltonian",
    "Trajectory",
    "anchor_E",
    "barthel",
    "barthel_geodesic",
    "barthel_transport",
    "christoffel",
    "curve_interpolant",
    "eta",
    "flow",
    "geodesic_invariance_check",
    "hamiltonian_vector_field",
    "horizontal_curve",
    "spray",
]
