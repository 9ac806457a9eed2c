"""
Covector fields along curves, annihilator sections and tensor values.
"""
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..dynamics.models import Trajectory


class Subbundle(str, Enum):
    """Target subbundle of a covector-valued tensor."""
    ANNIHILATOR = "D0"
    COMPLEMENT_ANNIHILATOR = "Dperp0"


class CovectorFieldAlongCurve(BaseModel):
    """One covector per trajectory sample."""

    trajectory: Trajectory
    samples: np.ndarray = Field(..., description="Covectors, one row per sample")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("samples", mode="before")
    @classmethod
    def _table(cls, value):
        array = np.array(value, dtype=float)
        if array.ndim != 2:
            raise ValueError(f"Expected one covector per row, got shape {array.shape}")
        return array

    @model_validator(mode="after")
    def _same_grid(self) -> "CovectorFieldAlongCurve":
        if self.samples.shape != self.trajectory.xs.shape:
            raise ValueError(
                f"Covector samples {self.samples.shape} do not match the trajectory grid {self.trajectory.xs.shape}"
            )
        return self

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times


class AnnihilatorSection(CovectorFieldAlongCurve):
    """Covector field along a curve annihilating the distribution at every sample."""

    residual: float = Field(0.0, description="Certificate residual (tensor or constraint norm)")
    annihilation: float = Field(0.0, description="max_t max_i |γ(t)·X_i(x(t))|")
    ode_residual: Optional[float] = Field(None, description="Residual of the defining ODE, when checked")
    kernel: Optional[np.ndarray] = Field(
        None, description="Homogeneous sections that can be added without breaking the constraints (d × samples × n)"
    )

    @property
    def kernel_dimension(self) -> int:
        return 0 if self.kernel is None else int(self.kernel.shape[0])


class TensorValue(BaseModel):
    """A covector at a point, tagged with the subbundle it lies in."""

    x: np.ndarray
    value: np.ndarray
    target: Subbundle

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.value))


class BracketValue(BaseModel):
    """[X, α] with its D⁰ and (D^⊥)⁰ parts."""

    value: np.ndarray
    annihilator_part: np.ndarray
    complement_part: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class NormalConnectionReport(BaseModel):
    """Residuals of the two normal-connection equations along a flow."""

    horizontal_residual: float = Field(..., description="max |∇^H α(P) + T(E(α), (P*)^c α)|")
    annihilator_residual: float = Field(..., description="max |∇^T P*α + T^B(E(α), α(P))|")
    samples: int
    note: str = Field(
        "T is evaluated on a (D^⊥)⁰ argument in the first equation although it is declared on D⁰",
        description="Typing caveat of the first equation",
    )
