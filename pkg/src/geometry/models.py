"""
Chart, frame and taming-metric models.
"""
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..expr import ScalarExpr
from ..expr.dual import seed, seed_batch, split


class Chart(BaseModel):
    """Single coordinate chart on ℝⁿ (or a product with circle factors)."""

    coordinate_names: Tuple[str, ...] = Field(..., description="Coordinate names, in order")
    periodic: Tuple[bool, ...] = Field((), description="Per-coordinate angle flag")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def _default_mask(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("periodic"):
            data = {**data, "periodic": (False,) * len(data.get("coordinate_names") or ())}
        return data

    @model_validator(mode="after")
    def _check(self) -> "Chart":
        if not self.coordinate_names:
            raise ValueError("Chart needs at least one coordinate")
        if len(set(self.coordinate_names)) != len(self.coordinate_names):
            raise ValueError(f"Duplicate coordinate names: {self.coordinate_names}")
        if len(self.periodic) != len(self.coordinate_names):
            raise ValueError("periodic mask must have one entry per coordinate")
        return self

    @property
    def n(self) -> int:
        return len(self.coordinate_names)

    def wrap(self, delta: np.ndarray) -> np.ndarray:
        """Map coordinate differences of periodic coordinates into (-π, π]; rows of a 2-D array are wrapped alike."""
        delta = np.array(delta, dtype=float)
        for i, periodic in enumerate(self.periodic):
            if periodic:
                delta[..., i] = np.pi - np.mod(np.pi - delta[..., i], 2.0 * np.pi)
        return delta


class Frame(BaseModel):
    """k vector fields given by n component expressions each."""

    columns: Tuple[Tuple[ScalarExpr, ...], ...] = Field(..., description="Frame fields X_1..X_k")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @field_validator("columns")
    @classmethod
    def _rectangular(cls, columns):
        if not columns:
            raise ValueError("Frame needs at least one vector field")
        n = len(columns[0])
        if any(len(c) != n for c in columns):
            raise ValueError("All frame fields need the same number of components")
        return columns

    @property
    def k(self) -> int:
        return len(self.columns)

    @property
    def n(self) -> int:
        return len(self.columns[0])

    def field(self, i: int):
        """Column i as a generic vector field x -> list of components."""
        components = self.columns[i]
        return lambda x: [c(x) for c in components]

    def generic(self, x: Sequence[Any]) -> np.ndarray:
        """n×k object (or float) matrix at a point whose entries may be dual numbers."""
        cols = [[c(x) for c in column] for column in self.columns]
        out = np.empty((self.n, self.k), dtype=object)
        for i, column in enumerate(cols):
            for j, value in enumerate(column):
                out[j, i] = value
        if all(isinstance(v, (int, float)) for v in out.flat):
            return out.astype(float)
        return out

    def matrix(self, x: np.ndarray) -> np.ndarray:
        x = [float(v) for v in x]
        return np.array([[c(x) for c in column] for column in self.columns], dtype=float).T

    def jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Frame matrix X (n×k) and its derivative dX[j, i, m] = ∂X_i^j/∂x_m."""
        n, k = self.n, self.k
        seeded = seed([float(v) for v in x])
        X = np.zeros((n, k))
        dX = np.zeros((n, k, n))
        for i, column in enumerate(self.columns):
            for j, component in enumerate(column):
                if component.is_constant:
                    X[j, i] = component([0.0] * n)
                    continue
                value, derivatives = split(component(seeded), 1, n)
                X[j, i] = value
                dX[j, i] = derivatives
        return X, dX

    def jacobian_batch(self, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Frames (N×n×k) and derivatives (N×n×k×n) at N points in one pass."""
        xs = np.asarray(xs, dtype=float)
        count, n = xs.shape
        seeded = seed_batch(xs.T)
        X = np.zeros((count, n, self.k))
        dX = np.zeros((count, n, self.k, n))
        for i, column in enumerate(self.columns):
            for j, component in enumerate(column):
                if component.is_constant:
                    X[:, j, i] = component([0.0] * n)
                    continue
                value, derivatives = split(component(seeded), 1, n)
                X[:, j, i] = value
                for m in range(n):
                    dX[:, j, i, m] = derivatives[m]
        return X, dX


class TamingMetric(BaseModel):
    """Riemannian metric g used for complements and projections; identity when unset."""

    g: Optional[Tuple[Tuple[ScalarExpr, ...], ...]] = Field(None, description="n×n expression matrix")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def is_identity(self) -> bool:
        return self.g is None

    def generic(self, x: Sequence[Any]) -> np.ndarray:
        n = len(x)
        if self.g is None:
            return np.eye(n)
        out = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                out[a, b] = self.g[a][b](x)
        if all(isinstance(v, (int, float)) for v in out.flat):
            return out.astype(float)
        return out

    def matrix(self, x: np.ndarray) -> np.ndarray:
        n = len(x)
        if self.g is None:
            return np.eye(n)
        x = [float(v) for v in x]
        return np.array([[self.g[a][b](x) for b in range(n)] for a in range(n)], dtype=float)

    def jacobian(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """g (n×n) and dg[a, b, m] = ∂g_ab/∂x_m."""
        n = len(x)
        if self.g is None:
            return np.eye(n), np.zeros((n, n, n))
        seeded = seed([float(v) for v in x])
        g = np.zeros((n, n))
        dg = np.zeros((n, n, n))
        for a in range(n):
            for b in range(n):
                value, derivatives = split(self.g[a][b](seeded), 1, n)
                g[a, b] = value
                dg[a, b] = derivatives
        return g, dg


class ProjectionSplit(BaseModel):
    """Tangent and cotangent projections at a point, as matrices.

    Covectors are column vectors; ``Pstar @ alpha`` is α∘P^⊥ and annihilates D,
    ``Pstar_c @ alpha`` is α∘P and annihilates D^⊥.
    """

    P: Any = Field(..., description="Tangent projection onto D")
    Pperp: Any = Field(..., description="Tangent projection onto the complement D^⊥")
    Pstar: Any = Field(..., description="Cotangent projection onto D⁰")
    Pstar_c: Any = Field(..., description="Cotangent projection onto (D^⊥)⁰")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
