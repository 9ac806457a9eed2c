"""
Legendre transform of L = F²/2, its inverse, and the dual metric F*.
"""
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..errors import DomainError, NoConvergence, RegularityError
from ..logger import logger
from .base import SubFinslerMetric

MAX_NEWTON_ITERATIONS = 50
NEWTON_TOL = 1e-12
MAX_BACKTRACKS = 40


def legendre(metric: SubFinslerMetric, x: Sequence[float], u: Sequence[float]) -> np.ndarray:
    """p̂ = ∂L/∂u at (x, u)."""
    return metric.grad_u(x, u)


def _newton_unit(metric: SubFinslerMetric, x: Sequence[float], p_hat: np.ndarray) -> np.ndarray:
    """Solve ∂L/∂u(x, u) = p̂ for |p̂| = 1 by damped Newton from the quadratic-part solution."""
    Q0 = np.array(metric.quadratic_part(x), dtype=float)
    u = np.linalg.solve(Q0, p_hat)
    residual = metric.grad_u(x, u) - p_hat
    norm = float(np.linalg.norm(residual))
    for iteration in range(MAX_NEWTON_ITERATIONS):
        if norm <= NEWTON_TOL:
            return u
        H = metric.hess_u(x, u)
        try:
            step = -np.linalg.solve(H, residual)
        except np.linalg.LinAlgError as e:
            raise NoConvergence(f"Legendre inverse: singular fiber Hessian ({e})", norm) from e
        t = 1.0
        for _ in range(MAX_BACKTRACKS):
            trial = u + t * step
            if np.any(trial):
                trial_residual = metric.grad_u(x, trial) - p_hat
                trial_norm = float(np.linalg.norm(trial_residual))
                if trial_norm < norm or trial_norm <= NEWTON_TOL:
                    break
            t *= 0.5
        else:
            logger.debug(f"Legendre inverse: line search stalled at residual {norm:.3e}")
            if norm <= 1e3 * NEWTON_TOL:
                return u
            raise NoConvergence("Legendre inverse line search stalled", norm)
        u, residual, norm = trial, trial_residual, trial_norm
    if norm <= NEWTON_TOL:
        return u
    raise NoConvergence(f"Legendre inverse did not converge in {MAX_NEWTON_ITERATIONS} iterations", norm)


def legendre_inverse(metric: SubFinslerMetric, x: Sequence[float], p_hat: Sequence[float]) -> np.ndarray:
    """The fiber vector u with ∂L/∂u = p̂.

    ∂L/∂u is positively homogeneous of degree one, so the solve runs on p̂/|p̂|
    and the result is rescaled.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    if metric.is_quadratic:
        try:
            return np.linalg.solve(np.array(metric.quadratic_part(x), dtype=float), p_hat)
        except np.linalg.LinAlgError as e:
            raise RegularityError(f"Quadratic metric matrix is singular: {e}") from e
    scale = float(np.linalg.norm(p_hat))
    if scale == 0.0:
        raise DomainError(f"Legendre inverse of the zero covector for a {metric.kind.value} metric")
    return scale * _newton_unit(metric, x, p_hat / scale)


def dual_metric(metric: SubFinslerMetric, x: Sequence[float], p_hat: Sequence[float]) -> float:
    """F*(p̂) = ⟨p̂, u*⟩ / F(u*) with u* the Legendre preimage."""
    p_hat = np.asarray(p_hat, dtype=float)
    if not np.any(p_hat):
        return 0.0
    u = legendre_inverse(metric, x, p_hat)
    return float(p_hat @ u) / metric.norm(x, u)


def dual_metric_sup(
    metric: SubFinslerMetric, x: Sequence[float], p_hat: Sequence[float], starts: int = 8, seed: int = 0
) -> float:
    """F*(p̂) as max over u ≠ 0 of ⟨p̂, u⟩ / F(u), by direct numerical maximization."""
    p_hat = np.asarray(p_hat, dtype=float)
    if not np.any(p_hat):
        return 0.0
    rng = np.random.default_rng(seed)
    x = list(x)

    def objective(u: np.ndarray) -> float:
        if not np.any(u):
            return 0.0
        return -float(p_hat @ u) / metric.norm(x, list(u))

    candidates = [np.linalg.solve(np.array(metric.quadratic_part(x), dtype=float), p_hat)]
    candidates += [rng.standard_normal(len(p_hat)) for _ in range(starts - 1)]
    best = 0.0
    for u0 in candidates:
        result = minimize(objective, u0, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
        best = max(best, -float(result.fun))
    return best
