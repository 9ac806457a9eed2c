"""
Built-in metric families: quadratic, curvature-weighted and custom expressions.
"""
from typing import Any, List, Sequence, Tuple

import numpy as np

from ..expr import ScalarExpr
from ..expr.dual import DualNumber, power, primal, seed, sqrt, split
from .base import SubFinslerMetric
from .models import MetricKind


def fiber_names(rank: int) -> List[str]:
    return [f"u{i + 1}" for i in range(rank)]


class QuadraticMetric(SubFinslerMetric):
    """F² = uᵀ Q(x) u with Q given by coordinate expressions."""

    kind = MetricKind.QUADRATIC

    def __init__(self, Q: Sequence[Sequence[ScalarExpr]]):
        super().__init__(len(Q))
        self.Q = tuple(tuple(row) for row in Q)
        self.constant = all(q.is_constant for row in self.Q for q in row)
        self._constant_matrix = None
        if self.constant:
            self._constant_matrix = self._symmetric(
                np.array([[q([]) for q in row] for row in self.Q], dtype=float)
            )

    @staticmethod
    def _symmetric(M: np.ndarray) -> np.ndarray:
        return 0.5 * (M + M.T)

    @property
    def is_quadratic(self) -> bool:
        return True

    def quadratic_part(self, x: Sequence[Any]) -> np.ndarray:
        if self.constant:
            return self._constant_matrix
        k = self.rank
        if any(isinstance(v, DualNumber) for v in x):
            M = np.empty((k, k), dtype=object)
            for a in range(k):
                for b in range(k):
                    M[a, b] = 0.5 * (self.Q[a][b](x) + self.Q[b][a](x))
            return M
        x = [float(v) for v in x]
        return self._symmetric(np.array([[q(x) for q in row] for row in self.Q], dtype=float))

    def squared_norm(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        Q = self.quadratic_part(x)
        k = self.rank
        total = 0.0
        for a in range(k):
            for b in range(k):
                total = total + Q[a, b] * u[a] * u[b]
        return total

    def grad_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        return self.quadratic_part(x) @ np.asarray(u, dtype=float)

    def hess_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        return np.array(self.quadratic_part(x), dtype=float)

    def quadratic_part_jacobian(self, x: Sequence[float]) -> np.ndarray:
        """dQ[a, b, m] = ∂Q_ab/∂x_m (symmetrized)."""
        n, k = len(x), self.rank
        dQ = np.zeros((k, k, n))
        if self.constant:
            return dQ
        seeded = seed([float(v) for v in x])
        for a in range(k):
            for b in range(k):
                _, d = split(self.Q[a][b](seeded), 1, n)
                dQ[a, b] += 0.5 * np.array([float(v) for v in d])
                dQ[b, a] += 0.5 * np.array([float(v) for v in d])
        return dQ

    def grad_x(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return 0.5 * np.einsum("a,abm,b->m", u, self.quadratic_part_jacobian(x), u)

    def mixed_ux(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        return np.einsum("abm,b->am", self.quadratic_part_jacobian(x), np.asarray(u, dtype=float))

    def derivatives(self, x: Sequence[float], u: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
        u = np.asarray(u, dtype=float)
        Qu = self.quadratic_part(x) @ u
        return 0.5 * float(u @ Qu), self.grad_x(x, u), Qu

    def grad_u_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        if self.constant:
            return np.asarray(us, dtype=float) @ self._constant_matrix
        return super().grad_u_batch(xs, us)

    def grad_x_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        if self.constant:
            return np.zeros_like(np.asarray(xs, dtype=float))
        return super().grad_x_batch(xs, us)

    def lagrangian_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        if self.constant:
            us = np.asarray(us, dtype=float)
            return 0.5 * np.einsum("na,ab,nb->n", us, self._constant_matrix, us)
        return super().lagrangian_batch(xs, us)


class CurvatureWeightedMetric(SubFinslerMetric):
    """Rank-2 metric penalizing the ratio κ = u₂/u₁ (turning per unit of forward motion).

    F⁴ = u₁⁴ + 2u₁²u₂² + αu₂⁴ = (u₁² + u₂²)² + (α − 1)u₂⁴, i.e. F = f(κ)|u| with
    f(κ)⁴ = (1 + 2κ² + ακ⁴)/(1 + κ²)². f grows with |κ| and stays bounded by α^¼;
    F² is strongly convex for every α ≥ 1.
    """

    kind = MetricKind.CURVATURE_WEIGHTED

    def __init__(self, alpha: float = 3.0):
        super().__init__(2)
        self.alpha = float(alpha)
        self.beta = self.alpha - 1.0

    def describe(self) -> str:
        return f"{self.kind.value}(alpha={self.alpha:g})"

    def quadratic_part(self, x: Sequence[Any]) -> np.ndarray:
        return np.diag([1.0, float(np.sqrt(self.alpha))])

    def squared_norm(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        u1, u2 = u[0], u[1]
        D = u1 * u1 + u2 * u2
        return sqrt(D * D + self.beta * power(u2, 4))

    def _parts(self, u1, u2):
        """q = F⁴, its gradient and Hessian entries, elementwise over arrays."""
        b = self.beta
        D = u1 * u1 + u2 * u2
        q = D * D + b * u2 ** 4
        q1 = 4.0 * D * u1
        q2 = 4.0 * D * u2 + 4.0 * b * u2 ** 3
        q11 = 4.0 * D + 8.0 * u1 * u1
        q12 = 8.0 * u1 * u2
        q22 = 4.0 * D + 8.0 * u2 * u2 + 12.0 * b * u2 * u2
        return q, q1, q2, q11, q12, q22

    def grad_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        self.require_regular(u)
        q, q1, q2, *_ = self._parts(float(u[0]), float(u[1]))
        # L = √q / 2
        return np.array([q1, q2]) / (4.0 * np.sqrt(q))

    def hess_u(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        self.require_regular(u)
        q, q1, q2, q11, q12, q22 = self._parts(float(u[0]), float(u[1]))
        rq = np.sqrt(q)
        H = np.array([[q11, q12], [q12, q22]]) / (4.0 * rq)
        H -= np.outer([q1, q2], [q1, q2]) / (8.0 * q * rq)
        return H

    def grad_x(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        return np.zeros(len(x))

    def mixed_ux(self, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
        return np.zeros((2, len(x)))

    def derivatives(self, x: Sequence[float], u: Sequence[float]) -> Tuple[float, np.ndarray, np.ndarray]:
        self.require_regular(u)
        q, q1, q2, *_ = self._parts(float(u[0]), float(u[1]))
        return 0.5 * float(np.sqrt(q)), np.zeros(len(x)), np.array([q1, q2]) / (4.0 * np.sqrt(q))

    def grad_u_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        for u in us:
            self.require_regular(u)
        q, q1, q2, *_ = self._parts(us[:, 0], us[:, 1])
        return np.stack([q1, q2], axis=1) / (4.0 * np.sqrt(q))[:, None]

    def grad_x_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(xs, dtype=float))

    def lagrangian_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=float)
        q = self._parts(us[:, 0], us[:, 1])[0]
        return 0.5 * np.sqrt(q)


class CustomMetric(SubFinslerMetric):
    """Metric given by an expression for F² (or for F) in coordinates and u1..uk."""

    kind = MetricKind.CUSTOM

    def __init__(self, expression: ScalarExpr, rank: int, coordinate_count: int, is_norm: bool = False):
        super().__init__(rank)
        self.expression = expression
        self.coordinate_count = coordinate_count
        self.is_norm = is_norm

    def describe(self) -> str:
        label = "F" if self.is_norm else "F2"
        return f"{self.kind.value}({label}={self.expression.source})"

    def _evaluate(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        return self.expression(list(x) + list(u))

    def squared_norm(self, x: Sequence[Any], u: Sequence[Any]) -> Any:
        value = self._evaluate(x, u)
        return value * value if self.is_norm else value

    def norm(self, x: Sequence[Any], u: Sequence[Any]) -> float:
        if self.is_norm:
            return float(primal(self._evaluate(x, u)))
        return super().norm(x, u)
