"""
Integration of the sub-Hamiltonian flow and of control-driven horizontal curves.
"""
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from ..errors import ConfigError
from ..geometry.frame import horizontal_residual, lift_covector
from ..logger import logger
from .hamiltonian import SubHamiltonian
from .integrators import adaptive, rk4
from .models import ExtremalState, FlowOptions, IntegratorKind, Trajectory

if TYPE_CHECKING:
    from ..systems.models import System

ControlLaw = Callable[[float], Sequence[float]]


def _integrate(fun, T: float, y0: np.ndarray, options: FlowOptions):
    if options.method == IntegratorKind.RK45:
        return adaptive(fun, T, y0, options.rtol, options.atol, options.samples)
    return rk4(fun, T, y0, options.dt)


def flow(system: "System", state0: ExtremalState, T: float, options: Optional[FlowOptions] = None) -> Trajectory:
    """
    Integrate ẋ = ∂η/∂p, ṗ = −∂η/∂x from state0 over [0, T].

    The trajectory is flagged (and a warning logged) when η drifts by more
    than options.conservation_tol; the integration itself is never aborted.

    Raises:
        DomainError: when p̂ vanishes for a non-quadratic metric
        StepFailure: when the adaptive integrator gives up
    """
    options = options or FlowOptions()
    if T <= 0:
        raise ConfigError(f"Flow time must be positive, got {T}")
    n = system.n
    hamiltonian = SubHamiltonian(system)

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        x_dot, p_dot, _ = hamiltonian.vector_field(y[:n], y[n:])
        return np.concatenate([x_dot, p_dot])

    y0 = np.concatenate([state0.x, state0.p])
    times, ys = _integrate(field, T, y0, options)
    xs, ps = ys[:, :n], ys[:, n:]

    controls = np.array([hamiltonian.controls(x, p) for x, p in zip(xs, ps)])
    velocities = np.array([hamiltonian.frame(x)[0] @ u for x, u in zip(xs, controls)])
    eta = np.array([hamiltonian.eta(x, p) for x, p in zip(xs, ps)])
    speed = np.array([_speed(system, x, u) for x, u in zip(xs, controls)])
    horizontality = np.array([horizontal_residual(system, x, v) for x, v in zip(xs, velocities)])

    drift = float(np.max(np.abs(eta - eta[0])))
    conserved = drift <= options.conservation_tol
    if not conserved:
        logger.warning(f"η drifted by {drift:.3e} along the flow (tolerance {options.conservation_tol:.1e})")
    logger.debug(f"Flow on {system.name}: {len(times)} samples, T={T}, η0={eta[0]:.6g}")
    return Trajectory(
        times=times,
        xs=xs,
        ps=ps,
        controls=controls,
        velocities=velocities,
        eta=eta,
        speed=speed,
        horizontality=horizontality,
        conserved=conserved,
        max_eta_drift=drift,
    )


def _speed(system: "System", x: np.ndarray, u: np.ndarray) -> float:
    if not np.any(u):
        return 0.0
    return system.metric.norm(list(x), list(u))


def horizontal_curve(
    system: "System",
    x0: Sequence[float],
    controls: ControlLaw,
    T: float,
    options: Optional[FlowOptions] = None,
) -> Trajectory:
    """
    Horizontal curve ẋ = Σ u_i(t) X_i(x) driven by a control law.

    The momentum channel holds the canonical lift of 𝓛(u) into (D^⊥)⁰ and η
    holds L(x, u), so the channels mean the same thing as on a flow.
    """
    options = options or FlowOptions()
    if T <= 0:
        raise ConfigError(f"Curve duration must be positive, got {T}")
    metric = system.metric

    def field(t: float, x: np.ndarray) -> np.ndarray:
        return system.frame.matrix(x) @ np.asarray(controls(t), dtype=float)

    times, xs = _integrate(field, T, np.asarray(x0, dtype=float), options)
    us = np.array([np.asarray(controls(t), dtype=float) for t in times])
    velocities = np.array([system.frame.matrix(x) @ u for x, u in zip(xs, us)])
    ps = np.zeros_like(xs)
    eta = np.zeros(len(times))
    for i, (x, u) in enumerate(zip(xs, us)):
        if np.any(u):
            ps[i] = lift_covector(system, x, metric.grad_u(x, u))
            eta[i] = float(metric.lagrangian(list(x), list(u)))
    speed = np.array([_speed(system, x, u) for x, u in zip(xs, us)])
    horizontality = np.array([horizontal_residual(system, x, v) for x, v in zip(xs, velocities)])
    drift = float(np.max(np.abs(eta - eta[0])))
    return Trajectory(
        times=times,
        xs=xs,
        ps=ps,
        controls=us,
        velocities=velocities,
        eta=eta,
        speed=speed,
        horizontality=horizontality,
        conserved=drift <= options.conservation_tol,
        max_eta_drift=drift,
    )


def curve_interpolant(trajectory: Trajectory) -> CubicHermiteSpline:
    """C¹ interpolant of the base curve using the sampled velocities."""
    return CubicHermiteSpline(trajectory.times, trajectory.xs, trajectory.velocities, axis=0)
