"""
Pointwise data shared by the connections and tensors, and differentiation on sample grids.
"""
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np

from ..geometry.frame import projection_data, projection_derivative

if TYPE_CHECKING:
    from ..systems.models import System


class LocalData(NamedTuple):
    """Projections and frame derivatives at (x, v)."""

    X: np.ndarray
    dX: np.ndarray
    P: np.ndarray
    Pstar: np.ndarray
    Pdot: np.ndarray
    u: np.ndarray
    J: np.ndarray


def local_data(system: "System", x: Sequence[float], v: Sequence[float]) -> LocalData:
    """
    Data at (x, v) for a tangent vector v.

    u are the frame coefficients of the horizontal part of v, J[j, m] = ∂_m V^j
    for the constant-coefficient extension V = Σ u_i X_i, and Pdot is the
    derivative of P along v.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    _, _, _, A = projection_data(system, x)
    X, dX = system.frame.jacobian(x)
    P = X @ A
    u = A @ v
    J = np.einsum("jim,i->jm", dX, u)
    Pstar = (np.eye(len(x)) - P).T
    return LocalData(X=X, dX=dX, P=P, Pstar=Pstar, Pdot=projection_derivative(system, x, v), u=u, J=J)


def flow_brackets(data: LocalData) -> np.ndarray:
    """n×k matrix of [V, X_i] for the constant-coefficient extension V of v."""
    V = data.X @ data.u
    # [V, X_i] = (∂X_i) V − (∂V) X_i
    return np.einsum("jim,m->ji", data.dX, V) - data.J @ data.X


def grid_derivative(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Time derivative of sampled values: fourth-order stencils on uniform grids."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    steps = np.diff(times)
    if len(times) < 5 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        if len(times) < 2:
            return np.zeros_like(values)
        return np.gradient(values, times, axis=0, edge_order=2 if len(times) > 2 else 1)
    h = steps[0]
    f = values
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return d


def nearest_index(times: np.ndarray, t: float) -> int:
    """Sample index closest to time t."""
    return int(np.argmin(np.abs(np.asarray(times) - t)))


def torsion_from(data: LocalData) -> np.ndarray:
    """Pᵀ(Jᵀ − Ṗᵀ): the linear map γ ↦ T(v, γ) on D⁰."""
    return data.P.T @ (data.J.T - data.Pdot.T)
