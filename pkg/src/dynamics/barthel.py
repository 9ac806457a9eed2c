"""
Berwald spray and Barthel connection of the extended Finsler metric F̂.

With L̂ = ½F̂² and ĝ the v-Hessian of L̂,
    G^i = ĝ^{ij} (∂²L̂/∂v^j∂x^k v^k − ∂L̂/∂x^j),    N^i_j = ½ ∂G^i/∂v^j,
and geodesics of F̂ solve ẍ = −G(x, ẋ). Quadratic sub-Finsler metrics give a
Riemannian F̂ for which G = Γ(v, v) and N^i_j = Γ^i_{jk} v^k; that case is
computed from ĝ and its first derivatives in floating point.
"""
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np

from ..config import settings
from ..errors import RegularityError, SingularHessian
from ..expr.dual import DualNumber, hessian, split
from ..geometry.extension import ExtendedMetric, extend_metric, extended_metric_tensor
from ..geometry.frame import horizontal_residual
from ..geometry.linalg import check_rank, primal_array, solve
from ..logger import logger
from .flow import curve_interpolant
from .integrators import rk4, rk4_on_grid
from .models import BarthelData, Trajectory

if TYPE_CHECKING:
    from ..systems.models import System


def christoffel(ghat: np.ndarray, dghat: np.ndarray) -> np.ndarray:
    """Γ[i, j, k] = Γ^i_{jk} from a metric and dg[a, b, m] = ∂g_ab/∂x_m."""
    lower = 0.5 * (np.transpose(dghat, (0, 2, 1)) + dghat - np.transpose(dghat, (2, 0, 1)))
    n = ghat.shape[0]
    try:
        return np.linalg.solve(ghat, lower.reshape(n, n * n)).reshape(n, n, n)
    except np.linalg.LinAlgError as e:
        raise SingularHessian(f"Extended metric tensor is singular: {e}") from e


def _riemannian(system: "System", x: Sequence[float]) -> np.ndarray:
    ghat, dghat = extended_metric_tensor(system, x)
    return christoffel(ghat, dghat)


def _generic_spray(extended: ExtendedMetric, x: Sequence[float], v: Sequence) -> np.ndarray:
    """G over generic v entries, from a two-level Hessian of L̂ in z = (x, v)."""
    n = len(x)
    z = [float(a) for a in x] + list(v)
    _, grad, second = hessian(lambda w: extended.lagrangian(w[:n], w[n:]), z, rows=range(n, 2 * n))
    second = np.array(second, dtype=object)
    g = second[:, n:]
    M = second[:, :n]
    try:
        check_rank(g, what="fiber Hessian of the extended Lagrangian")
    except RegularityError as e:
        raise SingularHessian(str(e)) from e
    rhs = np.array([sum(M[j, k] * v[k] for k in range(n)) - grad[j] for j in range(n)], dtype=object)
    return solve(g, rhs)


def barthel(
    system: "System", x: Sequence[float], v: Sequence[float], extended: Optional[ExtendedMetric] = None
) -> BarthelData:
    """
    Spray and connection coefficients of F̂ at (x, v).

    Raises:
        SingularHessian: if the v-Hessian of L̂ is not invertible
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if extended is None and system.metric.is_quadratic:
        gamma = _riemannian(system, x)
        N = np.einsum("ijk,k->ij", gamma, v)
        return BarthelData(G=N @ v, N=N)
    extended = extended or extend_metric(system)
    n = len(x)
    seeded = [DualNumber(float(a), np.eye(n)[i]) for i, a in enumerate(v)]
    G_dual = _generic_spray(extended, x, seeded)
    G = np.zeros(n)
    N = np.zeros((n, n))
    for i in range(n):
        value, derivatives = split(G_dual[i], 1, n)
        G[i] = float(value)
        N[i] = 0.5 * np.array([float(d) for d in derivatives])
    return BarthelData(G=G, N=N)


def spray(system: "System", x: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """G(x, v); geodesics of F̂ satisfy ẍ = −G(x, ẋ)."""
    if system.metric.is_quadratic:
        gamma = _riemannian(system, x)
        v = np.asarray(v, dtype=float)
        return np.einsum("ijk,j,k->i", gamma, v, v)
    G = _generic_spray(extend_metric(system), [float(a) for a in x], [float(a) for a in v])
    return primal_array(G)


def barthel_geodesic(
    system: "System", x0: Sequence[float], v0: Sequence[float], T: float, dt: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, xs, vs) of the F̂-geodesic from (x0, v0), RK4 with step dt."""
    dt = settings.invariance_dt if dt is None else dt
    n = len(x0)

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        return np.concatenate([y[n:], -spray(system, y[:n], y[n:])])

    times, ys = rk4(field, T, np.concatenate([np.asarray(x0, dtype=float), np.asarray(v0, dtype=float)]), dt)
    return times, ys[:, :n], ys[:, n:]


def geodesic_invariance_check(
    system: "System", x0: Sequence[float], v0: Sequence[float], T: float, dt: Optional[float] = None
) -> float:
    """Max over the F̂-geodesic from (x0, v0) of the g-distance from v(t) to D_{x(t)}."""
    times, xs, vs = barthel_geodesic(system, x0, v0, T, dt)
    residuals = np.array([horizontal_residual(system, x, v) for x, v in zip(xs, vs)])
    worst = float(residuals.max())
    logger.info(f"Geodesic invariance on {system.name}: initial residual {residuals[0]:.3e}, max {worst:.3e}")
    return worst


def barthel_transport(system: "System", trajectory: Trajectory, alpha0: Sequence[float]) -> np.ndarray:
    """
    Covectors α(t) along the trajectory with ∇̄^B_σ̇ α = 0, i.e. α̇_j = N^i_j α_i.

    Returns one row per trajectory sample.
    """
    curve = curve_interpolant(trajectory)
    velocity = curve.derivative()

    def field(t: float, alpha: np.ndarray) -> np.ndarray:
        data = barthel(system, curve(t), velocity(t))
        return data.N.T @ alpha

    return rk4_on_grid(field, trajectory.times, np.asarray(alpha0, dtype=float))
