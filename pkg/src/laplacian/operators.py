"""
Horizontal gradient, horizontal divergence and the sub-Laplacian Δ_F = div_D(grad_F).
"""
from typing import TYPE_CHECKING, Sequence

import numpy as np

from ..dynamics.hamiltonian import SubHamiltonian
from ..expr import ScalarExpr, hessian, jacobian
from ..metric.legendre import legendre_inverse
from .models import ScalarField, VolumeForm

if TYPE_CHECKING:
    from ..systems.models import System


def _differential(h: ScalarField, x: np.ndarray):
    """(dh, Hessian of h) at x."""
    _, grad, second = hessian(h.h, list(x))
    return np.array([float(g) for g in grad]), np.array([[float(s) for s in row] for row in second])


def horizontal_gradient(system: "System", h: ScalarField, x: Sequence[float]) -> np.ndarray:
    """
    grad_F h = E(dh), the Legendre preimage of dh restricted to D.

    Raises:
        DomainError: where dh vanishes on D for a non-quadratic metric
    """
    x = np.asarray(x, dtype=float)
    dh, _ = _differential(h, x)
    return SubHamiltonian(system).anchor(x, dh)


def _volume_drift(system: "System", x: np.ndarray) -> np.ndarray:
    """∂_j log √det g of the taming metric."""
    g, dg = system.taming.jacobian(x)
    return 0.5 * np.einsum("ab,bam->m", np.linalg.inv(g), dg)


def horizontal_divergence(
    system: "System",
    coefficients: Sequence[ScalarExpr],
    x: Sequence[float],
    volume: VolumeForm = VolumeForm.LEBESGUE,
) -> float:
    """div V for V = Σ c_i(x) X_i(x): Σ_j ∂V^j/∂x^j, plus the drift of the taming volume if chosen."""
    frame = system.frame
    if len(coefficients) != frame.k:
        raise ValueError(f"Need {frame.k} fiber coefficients, got {len(coefficients)}")
    fields = [frame.field(i) for i in range(frame.k)]

    def field(y):
        c = [coef(y) for coef in coefficients]
        columns = [f(y) for f in fields]
        return [sum(c[i] * columns[i][j] for i in range(frame.k)) for j in range(len(y))]

    x = np.asarray(x, dtype=float)
    values, rows = jacobian(field, list(x))
    divergence = sum(float(rows[j][j]) for j in range(len(x)))
    if volume == VolumeForm.TAMING:
        divergence += float(np.asarray([float(v) for v in values]) @ _volume_drift(system, x))
    return divergence


def sub_laplacian(
    system: "System", h: ScalarField, x: Sequence[float], volume: VolumeForm = VolumeForm.LEBESGUE
) -> float:
    """
    Δ_F h = div_D(grad_F h).

    The fiber coefficients u(y) of the gradient solve ∂L/∂u(y, u) = X(y)ᵀ dh(y);
    their derivatives follow from the implicit function theorem,
    ∂u/∂y = H⁻¹(∂p̂/∂y − ∂²L/∂u∂y) with H the fiber Hessian of L.

    Raises:
        DomainError: where dh vanishes on D for a non-quadratic metric
    """
    x = np.asarray(x, dtype=float)
    metric = system.metric
    X, dX = system.frame.jacobian(x)
    dh, ddh = _differential(h, x)
    p_hat = X.T @ dh
    u = legendre_inverse(metric, x, p_hat)
    # ∂p̂_i/∂y_m = Σ_j ∂_m X_i^j ∂_j h + X_i^j ∂_j∂_m h
    dp_hat = np.einsum("jim,j->im", dX, dh) + X.T @ ddh
    H = metric.hess_u(x, u)
    du = np.linalg.solve(H, dp_hat - metric.mixed_ux(x, u))
    # ∂_m V^j = Σ_i ∂_m X_i^j u_i + X_i^j ∂_m u_i, traced over j = m
    divergence = float(np.einsum("jij,i->", dX, u) + np.einsum("ji,ij->", X, du))
    if volume == VolumeForm.TAMING:
        divergence += float((X @ u) @ _volume_drift(system, x))
    return divergence
