"""
Extension of a sub-Finsler metric to a full Finsler metric on the tangent space.

F̂²(v) = F²(P v) + F̃²(P^⊥ v), with F̃ = c·‖·‖_g on the g-orthogonal complement.
"""
from typing import TYPE_CHECKING, Any, Sequence, Tuple

import numpy as np

from ..expr.dual import DualNumber, sqrt
from .frame import projection_data
from .linalg import check_rank

if TYPE_CHECKING:
    from ..metric.base import SubFinslerMetric
    from ..systems.models import System


class ComplementNorm:
    """F̃(w) = scale · sqrt(wᵀ g w) on D^⊥."""

    def __init__(self, scale: float = 1.0):
        if scale <= 0:
            raise ValueError(f"Complement scale must be positive, got {scale}")
        self.scale = float(scale)

    def squared_norm(self, g: np.ndarray, w: Sequence[Any]) -> Any:
        w = np.asarray(w)
        return self.scale ** 2 * np.dot(w, np.dot(g, w))


class ExtendedMetric:
    """Full Finsler norm F̂ built from a system's sub-Finsler metric and a complement norm."""

    def __init__(self, system: "System", complement: ComplementNorm):
        self.system = system
        self.metric: "SubFinslerMetric" = system.metric
        self.complement = complement

    def split(self, x: Sequence[Any], v: Sequence[Any]):
        """(u, w, g): frame coefficients of P v, the complement part P^⊥ v and the taming metric."""
        X, g, _, A = projection_data(self.system, x)
        if any(isinstance(a, DualNumber) for a in v):
            v = np.array(list(v), dtype=object)
        else:
            v = np.asarray(v, dtype=float)
        u = A @ v
        w = v - X @ u
        return list(u), list(w), g

    def squared_norm(self, x: Sequence[Any], v: Sequence[Any]) -> Any:
        u, w, g = self.split(x, v)
        return self.metric.squared_norm(x, u) + self.complement.squared_norm(g, w)

    def lagrangian(self, x: Sequence[Any], v: Sequence[Any]) -> Any:
        return 0.5 * self.squared_norm(x, v)

    def norm(self, x: Sequence[Any], v: Sequence[Any]) -> float:
        return float(sqrt(float(self.squared_norm(x, v))))


def extend_metric(system: "System", complement: ComplementNorm = None) -> ExtendedMetric:
    """F̂ for ``system``; the complement defaults to the system's complement scale."""
    if complement is None:
        complement = ComplementNorm(system.complement_scale)
    return ExtendedMetric(system, complement)


def extended_metric_tensor(system: "System", x: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """ĝ(x) with F̂² = vᵀĝv, and dĝ[a, b, m] = ∂ĝ_ab/∂x_m, for quadratic sub-Finsler metrics.

    ĝ = AᵀQA + c²BᵀgB with S = XᵀgX, A = S⁻¹Xᵀg and B = I − XA; the derivative
    is assembled from the matrix differentials of each factor.
    """
    metric = system.metric
    if not metric.is_quadratic:
        raise ValueError("extended_metric_tensor needs a quadratic sub-Finsler metric")
    x = np.asarray(x, dtype=float)
    n = len(x)
    X, dX = system.frame.jacobian(x)
    g, dg = system.taming.jacobian(x)
    check_rank(X)
    Q = np.asarray(metric.quadratic_part(x), dtype=float)
    dQ = metric.quadratic_part_jacobian(x)
    c2 = system.complement_scale ** 2

    Xg = X.T @ g
    S = Xg @ X
    A = np.linalg.solve(S, Xg)
    B = np.eye(n) - X @ A
    ghat = A.T @ Q @ A + c2 * (B.T @ g @ B)

    # Stack the m-th differentials along the leading axis
    dX_m = np.moveaxis(dX, 2, 0)
    dg_m = np.moveaxis(dg, 2, 0)
    dQ_m = np.moveaxis(dQ, 2, 0)
    dXt_g = np.transpose(dX_m, (0, 2, 1)) @ g
    Xt_dg = X.T @ dg_m
    dS = dXt_g @ X + Xt_dg @ X + Xg @ dX_m
    dA = np.linalg.solve(S, dXt_g + Xt_dg - dS @ A)
    dB = -(dX_m @ A + X @ dA)
    At = A.T
    dghat = (
        np.transpose(dA, (0, 2, 1)) @ Q @ A
        + At @ dQ_m @ A
        + At @ Q @ dA
        + c2 * (np.transpose(dB, (0, 2, 1)) @ g @ B + B.T @ dg_m @ B + B.T @ g @ dB)
    )
    return ghat, np.moveaxis(dghat, 0, 2)
