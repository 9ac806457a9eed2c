"""
Extremal states, trajectories, Barthel data and flow options.
"""
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..config import settings


def _float_array(value, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim != ndim:
        raise ValueError(f"Expected a {ndim}-dimensional array, got shape {array.shape}")
    return array


class ExtremalState(BaseModel):
    """A point of the cotangent bundle: base point x and momentum p."""

    x: np.ndarray = Field(..., description="Base point")
    p: np.ndarray = Field(..., description="Cotangent momentum")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("x", "p", mode="before")
    @classmethod
    def _vector(cls, value):
        array = _float_array(value, 1)
        if not np.all(np.isfinite(array)):
            raise ValueError("State entries must be finite")
        return array

    @model_validator(mode="after")
    def _same_length(self) -> "ExtremalState":
        if len(self.x) != len(self.p):
            raise ValueError(f"x has {len(self.x)} entries but p has {len(self.p)}")
        return self


class Trajectory(BaseModel):
    """Sampled curve with its momenta, controls and diagnostic channels."""

    times: np.ndarray = Field(..., description="Strictly increasing sample times")
    xs: np.ndarray = Field(..., description="Base points, one row per sample")
    ps: np.ndarray = Field(..., description="Momenta, one row per sample")
    controls: np.ndarray = Field(..., description="Frame coefficients u of the velocity")
    velocities: np.ndarray = Field(..., description="Tangent vectors Σ u_i X_i")
    eta: np.ndarray = Field(..., description="Sub-Hamiltonian along the curve")
    speed: np.ndarray = Field(..., description="F(σ̇) along the curve")
    horizontality: np.ndarray = Field(..., description="g-distance of σ̇ to D")
    conserved: bool = Field(True, description="Whether η stayed within the conservation tolerance")
    max_eta_drift: float = Field(0.0, description="max |η(t) − η(0)|")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("times", "eta", "speed", "horizontality", mode="before")
    @classmethod
    def _channel(cls, value):
        return _float_array(value, 1)

    @field_validator("xs", "ps", "controls", "velocities", mode="before")
    @classmethod
    def _table(cls, value):
        return _float_array(value, 2)

    @model_validator(mode="after")
    def _grid(self) -> "Trajectory":
        count = len(self.times)
        if count == 0:
            raise ValueError("Trajectory needs at least one sample")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Sample times must be strictly increasing")
        for name in ("xs", "ps", "controls", "velocities", "eta", "speed", "horizontality"):
            if len(getattr(self, name)) != count:
                raise ValueError(f"Channel {name} has {len(getattr(self, name))} samples, expected {count}")
        return self

    @property
    def n(self) -> int:
        return self.xs.shape[1]

    @property
    def k(self) -> int:
        return self.controls.shape[1]

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def states(self) -> List[ExtremalState]:
        return [ExtremalState(x=x, p=p) for x, p in zip(self.xs, self.ps)]

    @property
    def start(self) -> ExtremalState:
        return ExtremalState(x=self.xs[0], p=self.ps[0])

    @property
    def end(self) -> ExtremalState:
        return ExtremalState(x=self.xs[-1], p=self.ps[-1])


class BarthelData(BaseModel):
    """Spray coefficients G^i and connection coefficients N^i_j at (x, v)."""

    G: np.ndarray = Field(..., description="Spray coefficients, length n")
    N: np.ndarray = Field(..., description="Connection coefficients N[i, j] = N^i_j")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class IntegratorKind(str, Enum):
    """Time stepping scheme."""
    RK4 = "rk4"
    RK45 = "rk45"


class FlowOptions(BaseModel):
    """Integration settings for flows and transports."""

    method: IntegratorKind = Field(IntegratorKind.RK4, description="Fixed-step RK4 or adaptive RK45")
    dt: float = Field(default_factory=lambda: settings.default_dt, gt=0, description="RK4 step")
    rtol: float = Field(default_factory=lambda: settings.adaptive_rtol, gt=0, description="RK45 relative tolerance")
    atol: float = Field(default_factory=lambda: settings.adaptive_atol, gt=0, description="RK45 absolute tolerance")
    conservation_tol: float = Field(
        default_factory=lambda: settings.conservation_tol, gt=0, description="Allowed drift of η"
    )
    samples: Optional[int] = Field(
        None, ge=2, description="Uniform output grid for RK45; the solver's own steps when unset"
    )
