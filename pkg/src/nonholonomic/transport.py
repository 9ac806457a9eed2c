"""
Transport of annihilator covectors along horizontal curves, abnormal-extremal
certificates and the Vakonomic comparison.

A section γ of D⁰ along σ is ∇^T-parallel when P*(γ̇ + Jᵀγ) = 0, J being the
Jacobian of the constant-coefficient extension of σ̇. Written on all of T*M,
    γ̇ = −Ṗᵀγ − P* Jᵀγ (− T^B for the Vakonomic equation),
which keeps γ in D⁰. The homogeneous solutions are carried as an orthonormal
basis of D⁰ times an accumulated triangular factor (continuous QR).
"""
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from ..dynamics.barthel import barthel
from ..dynamics.flow import curve_interpolant
from ..dynamics.models import Trajectory
from ..geometry.frame import annihilator_basis, lift_covector, projection_split
from ..logger import logger
from .along import flow_brackets, grid_derivative, local_data, torsion_from
from .models import AnnihilatorSection, NormalConnectionReport
from .tensors import tensor_TB, torsion_matrix

if TYPE_CHECKING:
    from ..systems.models import System

ANNIHILATION_TOL = 1e-8
KERNEL_TOL = 1e-8


def _forcing(system: "System", x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """T^B(σ̇, 𝓛(σ̇)) with the Legendre image lifted into (D^⊥)⁰."""
    data = local_data(system, x, v)
    if not np.any(data.u):
        return np.zeros(len(x))
    p_hat = system.metric.grad_u(x, data.u)
    return tensor_TB(system, x, v, lift_covector(system, x, p_hat)).value


def _integrate(
    system: "System", trajectory: Trajectory, gamma0: Optional[np.ndarray], inhomogeneous: bool
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Fundamental solutions (samples × n × r) and, if requested, the particular solution from gamma0."""
    curve = curve_interpolant(trajectory)
    velocity = curve.derivative()
    times = trajectory.times
    n = system.n
    basis = annihilator_basis(system, trajectory.xs[0])
    r = basis.shape[1]

    def rhs(t: float, Y: np.ndarray, force: bool) -> np.ndarray:
        x, v = curve(t), velocity(t)
        data = local_data(system, x, v)
        out = -data.Pdot.T @ Y - data.Pstar @ (data.J.T @ Y)
        if force:
            out[:, -1] -= _forcing(system, x, v)
        return out

    extra = 1 if inhomogeneous or gamma0 is not None else 0
    Q = basis.copy()
    R_acc = np.eye(r)
    fundamental = np.empty((len(times), n, r))
    fundamental[0] = Q
    particular = None
    if extra:
        particular = np.empty((len(times), n))
        particular[0] = np.zeros(n) if gamma0 is None else gamma0
    Y = np.concatenate([Q, particular[0][:, None]], axis=1) if extra else Q

    for i in range(len(times) - 1):
        t, h = times[i], times[i + 1] - times[i]
        k1 = rhs(t, Y, inhomogeneous)
        k2 = rhs(t + 0.5 * h, Y + 0.5 * h * k1, inhomogeneous)
        k3 = rhs(t + 0.5 * h, Y + 0.5 * h * k2, inhomogeneous)
        k4 = rhs(t + h, Y + h * k3, inhomogeneous)
        Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        Pstar = projection_split(system, trajectory.xs[i + 1]).Pstar
        Y = Pstar @ Y
        if r:
            Q, R = np.linalg.qr(Y[:, :r])
            R_acc = R @ R_acc
            Y = np.concatenate([Q, Y[:, r:]], axis=1)
            fundamental[i + 1] = Q @ R_acc
        else:
            fundamental[i + 1] = np.zeros((n, 0))
        if extra:
            particular[i + 1] = Y[:, -1]
    return fundamental, particular


def _annihilation(system: "System", trajectory: Trajectory, samples: np.ndarray) -> float:
    worst = 0.0
    for x, gamma in zip(trajectory.xs, samples):
        X = system.frame.matrix(x)
        worst = max(worst, float(np.max(np.abs(X.T @ gamma), initial=0.0)))
    return worst


def transport_T(system: "System", trajectory: Trajectory, gamma0: Sequence[float]) -> AnnihilatorSection:
    """∇^T-parallel section of D⁰ along the trajectory with γ(0) = gamma0."""
    gamma0 = np.asarray(gamma0, dtype=float)
    basis = annihilator_basis(system, trajectory.xs[0])
    coordinates = basis.T @ gamma0
    if np.linalg.norm(basis @ coordinates - gamma0) > 1e-8 * max(1.0, np.linalg.norm(gamma0)):
        raise ValueError("gamma0 does not annihilate the distribution at the start of the curve")
    fundamental, _ = _integrate(system, trajectory, None, inhomogeneous=False)
    samples = fundamental @ coordinates
    annihilation = _annihilation(system, trajectory, samples)
    if annihilation > ANNIHILATION_TOL:
        logger.warning(f"Transported covector leaves D⁰ by {annihilation:.3e}")
    return AnnihilatorSection(trajectory=trajectory, samples=samples, annihilation=annihilation)


def _constraint_blocks(system: "System", trajectory: Trajectory, fundamental: np.ndarray) -> List[np.ndarray]:
    """Per sample, the rows T(σ̇, ·) and γ ↦ γ([σ̇, X_i]) applied to the fundamental solutions."""
    blocks = []
    for x, v, M in zip(trajectory.xs, trajectory.velocities, fundamental):
        data = local_data(system, x, v)
        torsion = torsion_from(data)
        brackets = flow_brackets(data)
        blocks.append((torsion @ M, brackets.T @ M))
    return blocks


def abnormal_check(system: "System", trajectory: Trajectory, tol: float = 1e-6) -> Optional[AnnihilatorSection]:
    """
    Certificate that the curve is an abnormal extremal: a ∇^T-parallel γ ≠ 0 in D⁰
    with T(σ̇, γ) = 0 and γ ∈ (D + [σ̇, D])⁰ at every sample, or None.
    """
    r = system.n - system.k
    if r == 0:
        return None
    fundamental, _ = _integrate(system, trajectory, None, inhomogeneous=False)
    blocks = _constraint_blocks(system, trajectory, fundamental)
    stacked = np.concatenate([np.concatenate(block, axis=0) for block in blocks], axis=0)
    _, singular, vt = np.linalg.svd(stacked)
    coordinates = vt[-1]
    basis = annihilator_basis(system, trajectory.xs[0])
    # Unit initial covector
    coordinates = coordinates / np.linalg.norm(basis @ coordinates)
    samples = fundamental @ coordinates
    residual = max(
        max(float(np.linalg.norm(t_rows @ coordinates)), float(np.linalg.norm(b_rows @ coordinates)))
        for t_rows, b_rows in blocks
    )
    logger.info(f"Abnormal check on {system.name}: best certificate residual {residual:.3e}")
    if residual > tol:
        return None
    return AnnihilatorSection(
        trajectory=trajectory,
        samples=samples,
        residual=residual,
        annihilation=_annihilation(system, trajectory, samples),
    )


def _ode_residual(system: "System", trajectory: Trajectory, samples: np.ndarray) -> float:
    """max_t |P*(γ̇ + Jᵀγ) + T^B(σ̇, 𝓛(σ̇))| with γ̇ from grid differences."""
    gamma_dot = grid_derivative(trajectory.times, samples)
    worst = 0.0
    for x, v, gamma, d_gamma in zip(trajectory.xs, trajectory.velocities, samples, gamma_dot):
        data = local_data(system, x, v)
        residual = data.Pstar @ (d_gamma + data.J.T @ gamma) + _forcing(system, x, v)
        worst = max(worst, float(np.linalg.norm(residual)))
    return worst


def integrate_vakonomic(system: "System", trajectory: Trajectory, gamma0: Sequence[float]) -> AnnihilatorSection:
    """Solution of ∇^T_σ̇ γ = −T^B(σ̇, 𝓛(σ̇)) with γ(0) = gamma0, with its ODE residual."""
    _, particular = _integrate(system, trajectory, np.asarray(gamma0, dtype=float), inhomogeneous=True)
    return AnnihilatorSection(
        trajectory=trajectory,
        samples=particular,
        annihilation=_annihilation(system, trajectory, particular),
        ode_residual=_ode_residual(system, trajectory, particular),
    )


def vakonomic_comparison(system: "System", trajectory: Trajectory, tol: float = 1e-6) -> Optional[AnnihilatorSection]:
    """
    A solution γ of the Vakonomic equation along the curve lying in (D + [σ̇, D])⁰
    at every sample, or None when no initial condition achieves it.

    The returned γ has the minimum-norm initial condition. Initial conditions
    are unique only when ``kernel_dimension`` is 0; otherwise ``kernel`` holds
    the homogeneous sections that may be added, which on an abnormal curve
    include the certificate of ``abnormal_check``.
    """
    fundamental, particular = _integrate(system, trajectory, None, inhomogeneous=True)
    rows, rhs = [], []
    for x, v, M, g_p in zip(trajectory.xs, trajectory.velocities, fundamental, particular):
        brackets = flow_brackets(local_data(system, x, v))
        rows.append(brackets.T @ M)
        rhs.append(-brackets.T @ g_p)
    A = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs, axis=0)
    r = A.shape[1]
    coordinates = np.zeros(r)
    null = np.zeros((0, r))
    if r:
        _, singular, vt = np.linalg.svd(A, full_matrices=False)
        cutoff = KERNEL_TOL * max(float(singular[0]) if singular.size else 0.0, 1.0)
        rank = int(np.sum(singular > cutoff))
        coordinates = vt[:rank].T @ ((vt[:rank] @ (A.T @ b)) / singular[:rank] ** 2)
        null = np.eye(r) if rank == 0 else null_space(vt[:rank]).T
    samples = fundamental @ coordinates + particular
    residual = float(np.max(np.abs(A @ coordinates - b), initial=0.0))
    logger.info(f"Vakonomic comparison on {system.name}: subspace residual {residual:.3e}")
    if len(null):
        logger.info(f"Vakonomic initial condition is not unique: {len(null)}-dimensional family")
    if residual > tol:
        return None
    return AnnihilatorSection(
        trajectory=trajectory,
        samples=samples,
        residual=residual,
        annihilation=_annihilation(system, trajectory, samples),
        ode_residual=_ode_residual(system, trajectory, samples),
        kernel=np.einsum("tnr,dr->dtn", fundamental, null),
    )


def normal_connection_check(system: "System", trajectory: Trajectory) -> NormalConnectionReport:
    """
    Residuals along a flow α(t) = p(t) of
        ∇^H_{E(α)} α(P) = −T(E(α), (P*)^c α),
        ∇^T_{E(α)} P*α = −T^B(E(α), α(P)).
    """
    datas = [local_data(system, x, v) for x, v in zip(trajectory.xs, trajectory.velocities)]
    horizontal = np.array([d.P.T @ p for d, p in zip(datas, trajectory.ps)])
    annihilator = np.array([d.Pstar @ p for d, p in zip(datas, trajectory.ps)])
    d_horizontal = grid_derivative(trajectory.times, horizontal)
    d_annihilator = grid_derivative(trajectory.times, annihilator)
    first, second = 0.0, 0.0
    for i, (x, v, data) in enumerate(zip(trajectory.xs, trajectory.velocities, datas)):
        N = barthel(system, x, v).N
        nabla_h = data.Pstar @ (d_horizontal[i] - N.T @ horizontal[i])
        torsion = torsion_matrix(system, x, v) @ horizontal[i]
        first = max(first, float(np.linalg.norm(nabla_h + torsion)))
        nabla_t = data.Pstar @ (d_annihilator[i] + data.J.T @ annihilator[i])
        forcing = tensor_TB(system, x, v, horizontal[i]).value
        second = max(second, float(np.linalg.norm(nabla_t + forcing)))
    return NormalConnectionReport(horizontal_residual=first, annihilator_residual=second, samples=len(datas))

