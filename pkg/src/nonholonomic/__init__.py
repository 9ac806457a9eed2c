"""
Nonholonomic connections and tensors, abnormal certificates and the Vakonomic comparison.
"""
from .along import LocalData, flow_brackets, grid_derivative, local_data
from .models import (
    AnnihilatorSection,
    BracketValue,
    CovectorFieldAlongCurve,
    NormalConnectionReport,
    Subbundle,
    TensorValue,
)
from .tensors import (
    barthel_covariant_derivative,
    connection_along,
    covariant_derivative_samples,
    nabla_bar,
    nabla_H,
    nonholonomic_bracket,
    subbundle_residual,
    tensor_T,
    tensor_TB,
    torsion_matrix,
)
from .transport import (
    abnormal_check,
    integrate_vakonomic,
    normal_connection_check,
    transport_T,
    vakonomic_comparison,
)

__all__ = [
    "AnnihilatorSection",
    "BracketValue",
    "CovectorFieldAlongCurve",
    "LocalData",
    "NormalConnectionReport",
    "Subbundle",
    "TensorValue",
    "abnormal_check",
    "barthel_covariant_derivative",
    "connection_along",
    "covariant_derivative_samples",
    "flow_brackets",
    "grid_derivative",
    "integrate_vakonomic",
    "local_data",
    "nabla_H",
    "nabla_bar",
    "nonholonomic_bracket",
    "normal_connection_check",
    "subbundle_residual",
    "tensor_T",
    "tensor_TB",
    "torsion_matrix",
    "transport_T",
    "vakonomic_comparison",
]
