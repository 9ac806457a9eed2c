"""
System model and its declarative specification.
"""
from typing import List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..geometry.models import Chart, Frame, TamingMetric
from ..metric.base import SubFinslerMetric
from ..metric.models import MetricSpec


class System(BaseModel):
    """A complete geometric problem: chart, distribution frame, taming metric and sub-Finsler metric."""

    name: str = Field(..., description="Catalog name or config label")
    chart: Chart
    frame: Frame
    taming: TamingMetric = Field(default_factory=TamingMetric)
    metric: SubFinslerMetric
    complement_scale: float = Field(1.0, description="F̃ = c·‖·‖_g on the complement of D", gt=0)

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _dimensions(self) -> "System":
        if self.frame.n != self.chart.n:
            raise ValueError(f"Frame fields have {self.frame.n} components, chart has {self.chart.n}")
        if self.metric.rank != self.frame.k:
            raise ValueError(f"Metric rank {self.metric.rank} differs from frame rank {self.frame.k}")
        if self.taming.g is not None and len(self.taming.g) != self.chart.n:
            raise ValueError("Taming metric must be n×n")
        return self

    @property
    def n(self) -> int:
        return self.chart.n

    @property
    def k(self) -> int:
        return self.frame.k

    @property
    def coordinate_names(self) -> tuple:
        return self.chart.coordinate_names


Entry = Union[str, float]


class SystemSpec(BaseModel):
    """Inline system description as found in config files."""

    name: str = Field("inline", description="Label used in outputs")
    dim: int = Field(..., ge=1, description="Chart dimension n")
    coordinates: Optional[List[str]] = Field(None, description="Coordinate names; x1..xn when omitted")
    periodic: Optional[List[bool]] = Field(None, description="Angle-coordinate mask")
    frame: List[List[Entry]] = Field(..., description="k×n matrix: one row of n components per field")
    taming: Optional[List[List[Entry]]] = Field(None, description="n×n taming metric, identity when omitted")
    metric: MetricSpec = Field(default_factory=MetricSpec)
    complement_scale: float = Field(1.0, gt=0)

    @model_validator(mode="after")
    def _shapes(self) -> "SystemSpec":
        if self.coordinates is not None and len(self.coordinates) != self.dim:
            raise ValueError(f"Expected {self.dim} coordinate names, got {len(self.coordinates)}")
        if self.periodic is not None and len(self.periodic) != self.dim:
            raise ValueError(f"Expected {self.dim} periodic flags, got {len(self.periodic)}")
        if not self.frame or any(len(row) != self.dim for row in self.frame):
            raise ValueError(f"Every frame field needs {self.dim} components")
        if self.taming is not None and (
            len(self.taming) != self.dim or any(len(row) != self.dim for row in self.taming)
        ):
            raise ValueError(f"Taming metric must be {self.dim}×{self.dim}")
        return self

    @property
    def coordinate_names(self) -> List[str]:
        return self.coordinates or [f"x{i + 1}" for i in range(self.dim)]
