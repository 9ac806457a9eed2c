"""
Scalar fields, sampling boxes and flatness reports.
"""
from enum import Enum
from typing import Any, Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..expr import ScalarExpr, parse


class VolumeForm(str, Enum):
    """Volume used by the horizontal divergence."""
    LEBESGUE = "lebesgue"
    TAMING = "taming"


class ScalarField(BaseModel):
    """A function h on the chart."""

    h: ScalarExpr
    label: str = Field("", description="Display name, the expression source when empty")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @classmethod
    def parse(cls, source: str, coordinates: Sequence[str]) -> "ScalarField":
        return cls(h=parse(source, coordinates), label=source)

    @property
    def name(self) -> str:
        return self.label or self.h.source


class SamplingBox(BaseModel):
    """Axis-aligned box of chart points."""

    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def _shape(self) -> "SamplingBox":
        if len(self.lower) != len(self.upper):
            raise ValueError("Box corners differ in dimension")
        return self

    @classmethod
    def centered(cls, dim: int, half_width: float) -> "SamplingBox":
        return cls(lower=[-half_width] * dim, upper=[half_width] * dim)

    @property
    def is_empty(self) -> bool:
        return any(hi < lo for lo, hi in zip(self.lower, self.upper)) or not self.lower

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        return lower + (upper - lower) * rng.random((count, len(lower)))


class FlatnessReport(BaseModel):
    """Δ_F over test fields × sample points."""

    fields: List[str] = Field(..., description="Test field labels, one row of values each")
    samples: np.ndarray = Field(..., description="Sample points")
    values: np.ndarray = Field(..., description="values[f, s]; NaN where the point was skipped")
    max_abs: float
    flat: bool = Field(..., description="Whether max_abs is within the flatness tolerance")
    tolerance: float
    skipped: int = Field(0, description="Points dropped because of domain errors")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def to_table(self) -> Dict[str, Any]:
        return {
            "fields": self.fields,
            "samples": self.samples.tolist(),
            "values": [[None if np.isnan(v) else float(v) for v in row] for row in self.values],
            "max_abs": self.max_abs,
            "flat": self.flat,
            "tolerance": self.tolerance,
            "skipped": self.skipped,
        }
