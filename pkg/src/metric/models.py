"""
Metric specification and validation report models.
"""
from enum import Enum
from typing import List, Optional, Union

from pydantic import BaseModel, Field, model_validator


class MetricKind(str, Enum):
    """Built-in sub-Finsler metric families."""
    QUADRATIC = "quadratic"
    CURVATURE_WEIGHTED = "curvature_weighted"
    CUSTOM = "custom"


class MetricSpec(BaseModel):
    """Metric block of a system description."""

    type: MetricKind = Field(MetricKind.QUADRATIC, description="Metric family")
    Q: Optional[List[List[Union[str, float]]]] = Field(
        None, description="k×k symmetric matrix of expressions (quadratic); identity when omitted"
    )
    alpha: float = Field(3.0, description="Curvature weight of the curvature_weighted family")
    F2: Optional[str] = Field(None, description="Squared norm expression in coordinates and u1..uk")
    F: Optional[str] = Field(None, description="Norm expression in coordinates and u1..uk")

    @model_validator(mode="after")
    def _check(self) -> "MetricSpec":
        if self.type == MetricKind.CUSTOM and (self.F2 is None) == (self.F is None):
            raise ValueError("custom metric needs exactly one of 'F2' or 'F'")
        return self


class AxiomCheck(BaseModel):
    """One axiom's worst observed value against its threshold."""

    name: str
    worst: float = Field(..., description="Worst observed value over the samples")
    threshold: float
    passed: bool
    failures: int = Field(0, description="Number of failing samples")


class ValidationReport(BaseModel):
    """Sampled check of the metric axioms."""

    samples: int
    seed: int
    duality_samples: int = Field(0, description="Leading samples that also checked F*∘𝓛 = F")
    max_homogeneity_violation: float = Field(..., description="max |F(λu) − |λ|F(u)| / F(u)")
    min_hessian_eigenvalue: float = Field(..., description="min eigenvalue of the u-Hessian of F²")
    min_norm: float = Field(..., description="smallest sampled F value")
    max_duality_error: float = Field(0.0, description="max |F*(𝓛(u)) − F(u)| / F(u)")
    domain_errors: int = Field(0, description="Samples where F or its derivatives were undefined")
    checks: List[AxiomCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)
