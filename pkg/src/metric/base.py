"""
Sub-Finsler metric interface.

A metric is a fiber norm F(x, u) on frame coordinates u ∈ ℝᵏ. Every method
accepting generic numbers works on floats and (nested) dual numbers alike, which
is how the geometry and dynamics code differentiates through it.
"""
from abc import ABC, abstractmethod
from typing import Any, Sequence, Tuple

import numpy as np

from ..errors import DomainError
from ..expr.dual import gradient, hessian, primal, sqrt
from .models import MetricKind


class SubFinslerMetric(ABC):
    """Abstract base class for fiber norms on the distribution."""

    kind: MetricKind

    def __init__(self, rank: int):
        self.rank = rank

    @abstractmethod
    def squared_norm(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        """F²(x, u) over generic numbers."""

    @property
    def is_quadratic(self) -> bool:
        return False

    def quadratic_part(self, x: Sequence[Any]) -> np.ndarray:
        """Best quadratic stand-in: diag(F²(x, e_i)); exact for quadratic metrics."""
        x = [float(primal(v)) for v in x]
        eye = np.eye(self.rank)
        return np.diag([float(self.squared_norm(x, list(eye[i]))) for i in range(self.rank)])

    def lagrangian(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        return 0.5 * self.squared_norm(x, u)

    def norm(self, x: Sequence[Any], u: Sequence[Any]) -> float:
        return float(sqrt(float(self.squared_norm(x, u))))

    def require_regular(self, u: Sequence[float]) -> None:
        if not self.is_quadratic and not np.any(np.asarray(u, dtype=float)):
            raise DomainError(f"{self.kind.value} metric is not differentiable at u = 0")

    # Derivatives of L = F²/2, by forward-mode AD unless a family overrides them

    def grad_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        self.require_regular(u)
        x = list(x)
        _, grad = gradient(lambda v: self.lagrangian(x, v), list(u))
        return np.array([float(g) for g in grad])

    def hess_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        self.require_regular(u)
        x = list(x)
        _, _, second = hessian(lambda v: self.lagrangian(x, v), list(u))
        return np.array([[float(h) for h in row] for row in second])

    def grad_x(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        self.require_regular(u)
        u = list(u)
        _, grad = gradient(lambda y: self.lagrangian(y, u), list(x))
        return np.array([float(g) for g in grad])

    def mixed_ux(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        """k×n matrix ∂²L/∂u_a∂x_m."""
        self.require_regular(u)
        n, k = len(x), len(u)
        z = list(x) + list(u)
        _, _, second = hessian(lambda w: self.lagrangian(w[:n], w[n:]), z, rows=range(n, n + k))
        return np.array([[float(h) for h in row[:n]] for row in second])

    def derivatives(self, x: Sequence[float], u: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
        """(L, ∂L/∂x, ∂L/∂u) in one pass."""
        self.require_regular(u)
        n = len(x)
        value, grad = gradient(lambda w: self.lagrangian(w[:n], w[n:]), list(x) + list(u))
        grad = np.array([float(g) for g in grad])
        return float(value), grad[:n], grad[n:]

    def grad_u_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.array([self.grad_u(x, u) for x, u in zip(xs, us)])

    def grad_x_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.array([self.grad_x(x, u) for x, u in zip(xs, us)])

    def lagrangian_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.array([float(self.lagrangian(list(x), list(u))) for x, u in zip(xs, us)])

    def describe(self) -> str:
        return self.kind.value
