"""
Covariant derivatives along curves, the tensors T^B and T, and the nonholonomic bracket.

Covectors are stored as coordinate vectors; P* = (P^⊥)ᵀ projects onto D⁰ and
(P*)^c = Pᵀ onto (D^⊥)⁰. The Barthel derivative of a covector field along a
curve is (∇̄^B_σ̇ α)_j = α̇_j − N^i_j α_i.
"""
from typing import TYPE_CHECKING, List, Sequence

import numpy as np

from ..dynamics.barthel import barthel
from ..dynamics.models import Trajectory
from ..expr import ScalarExpr
from ..geometry.frame import bracket, orthogonal_complement_frame, projection_split
from ..geometry.linalg import solve
from .along import grid_derivative, local_data, nearest_index, torsion_from
from .models import BracketValue, CovectorFieldAlongCurve, Subbundle, TensorValue

if TYPE_CHECKING:
    from ..systems.models import System


def connection_along(system: "System", trajectory: Trajectory) -> np.ndarray:
    """Barthel coefficients N(x(t), ẋ(t)) per sample."""
    return np.array([barthel(system, x, v).N for x, v in zip(trajectory.xs, trajectory.velocities)])


def covariant_derivative_samples(system: "System", alpha: CovectorFieldAlongCurve) -> np.ndarray:
    """∇̄^B_σ̇ α at every sample."""
    N = connection_along(system, alpha.trajectory)
    alpha_dot = grid_derivative(alpha.times, alpha.samples)
    return alpha_dot - np.einsum("tij,ti->tj", N, alpha.samples)


def barthel_covariant_derivative(
    system: "System", curve: Trajectory, alpha: CovectorFieldAlongCurve, t: float
) -> np.ndarray:
    """
    (∇̄^B_σ̇ α)(t) with α̇ from fourth-order grid differences; t snaps to the nearest sample.

    Raises:
        SingularHessian: propagated from the Barthel coefficients
    """
    if alpha.trajectory is not curve and not np.array_equal(alpha.times, curve.times):
        raise ValueError("Covector field and curve use different sample grids")
    i = nearest_index(curve.times, t)
    x, v = curve.xs[i], curve.velocities[i]
    alpha_dot = grid_derivative(curve.times, alpha.samples)[i]
    N = barthel(system, x, v).N
    return alpha_dot - N.T @ alpha.samples[i]


def _split(system: "System", x: Sequence[float]):
    projections = projection_split(system, x)
    return projections.P, projections.Pstar


def nabla_H(system: "System", curve: Trajectory, alpha: CovectorFieldAlongCurve, t: float) -> np.ndarray:
    """∇^H_σ̇ α = P*(∇̄^B_σ̇ α), a covector in D⁰."""
    i = nearest_index(curve.times, t)
    _, Pstar = _split(system, curve.xs[i])
    return Pstar @ barthel_covariant_derivative(system, curve, alpha, t)


def nabla_bar(system: "System", curve: Trajectory, alpha: CovectorFieldAlongCurve, t: float) -> np.ndarray:
    """∇̄_σ̇ α = P*(∇̄^B_σ̇ P*α) + (P*)^c(∇̄^B_σ̇ (P*)^c α), each part in its own subbundle."""
    splits = [_split(system, x) for x in curve.xs]
    annihilator = np.array([Pstar @ a for (_, Pstar), a in zip(splits, alpha.samples)])
    complement = np.array([P.T @ a for (P, _), a in zip(splits, alpha.samples)])
    i = nearest_index(curve.times, t)
    P, Pstar = splits[i]
    first = barthel_covariant_derivative(
        system, curve, CovectorFieldAlongCurve(trajectory=curve, samples=annihilator), t
    )
    second = barthel_covariant_derivative(
        system, curve, CovectorFieldAlongCurve(trajectory=curve, samples=complement), t
    )
    return Pstar @ first + P.T @ second


def tensor_TB(system: "System", x: Sequence[float], v: Sequence[float], alpha: Sequence[float]) -> TensorValue:
    """
    T^B(v, α) = P*(∇̄^B_v α) for the chart-constant extension of α, i.e. −P* N(x, v)ᵀ α.
    """
    x = np.asarray(x, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    _, Pstar = _split(system, x)
    N = barthel(system, x, v).N
    return TensorValue(x=x, value=-Pstar @ (N.T @ alpha), target=Subbundle.ANNIHILATOR)


def torsion_matrix(system: "System", x: Sequence[float], v: Sequence[float]) -> np.ndarray:
    """Matrix L with T(v, γ) = L γ for γ ∈ D⁰_x.

    γ is extended by γ(y) = P*(y) γ, which stays in D⁰; for v ∈ D and
    γ ∈ Γ(D⁰), i_v dγ equals the Lie derivative of γ along the
    constant-coefficient extension of v.
    """
    return torsion_from(local_data(system, x, v))


def tensor_T(system: "System", x: Sequence[float], v: Sequence[float], gamma: Sequence[float]) -> TensorValue:
    """T(v, γ) = (P*)^c(i_v dγ), a covector in (D^⊥)⁰."""
    x = np.asarray(x, dtype=float)
    value = torsion_matrix(system, x, v) @ np.asarray(gamma, dtype=float)
    return TensorValue(x=x, value=value, target=Subbundle.COMPLEMENT_ANNIHILATOR)


def subbundle_residual(system: "System", tensor: TensorValue) -> float:
    """How far a tensor value is from its tagged subbundle."""
    if tensor.target == Subbundle.ANNIHILATOR:
        X = system.frame.matrix(tensor.x)
        return float(np.max(np.abs(X.T @ tensor.value), initial=0.0))
    complement = orthogonal_complement_frame(system, tensor.x)
    return max((abs(float(w @ tensor.value)) for w in complement), default=0.0)


def nonholonomic_bracket(
    system: "System",
    x: Sequence[float],
    coefficients: Sequence[ScalarExpr],
    alpha: Sequence[ScalarExpr],
) -> BracketValue:
    """
    [X, α] for X = Σ c_i X_i and a covector field α, through the taming identification:
    [X, α] = g [X, g⁻¹α].
    """
    frame, taming = system.frame, system.taming
    if len(coefficients) != frame.k or len(alpha) != system.n:
        raise ValueError(f"Need {frame.k} coefficients and {system.n} covector components")
    fields = [frame.field(i) for i in range(frame.k)]

    def horizontal(y: Sequence) -> List:
        columns = [f(y) for f in fields]
        c = [coef(y) for coef in coefficients]
        return [sum(c[i] * columns[i][j] for i in range(frame.k)) for j in range(len(y))]

    def sharp(y: Sequence) -> List:
        g = taming.generic(y)
        components = np.empty(len(y), dtype=object)
        for j, a in enumerate(alpha):
            components[j] = a(y)
        return list(solve(g, components))

    point = [float(v) for v in x]
    vector = np.array([float(b) for b in bracket(horizontal, sharp)(point)])
    value = taming.matrix(np.asarray(point)) @ vector
    P, Pstar = _split(system, point)
    return BracketValue(value=value, annihilator_part=Pstar @ value, complement_part=P.T @ value)
