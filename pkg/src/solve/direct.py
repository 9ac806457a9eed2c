"""
Direct discretization: piecewise-constant controls, explicit midpoint dynamics,
penalized endpoint, steepest descent with Armijo backtracking.
"""
from typing import TYPE_CHECKING, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from ..dynamics.models import Trajectory
from ..errors import NoConvergence
from ..geometry.frame import projection_data
from ..logger import logger
from .models import DirectOptions

if TYPE_CHECKING:
    from ..systems.models import System

ARMIJO = 1e-4
MAX_BACKTRACKS = 50


class DirectProblem:
    """Energy Σ L(x_i, u_i) h + μ‖x_N − x1‖² on a uniform grid over [0, 1]."""

    def __init__(self, system: "System", x0: np.ndarray, x1: np.ndarray, N: int):
        self.system = system
        self.x0 = x0
        self.x1 = x1
        self.N = N
        self.h = 1.0 / N

    def forward(self, controls: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """States x_0..x_N and midpoint states y_0..y_{N−1}."""
        frame, h = self.system.frame, self.h
        xs = np.empty((self.N + 1, len(self.x0)))
        ys = np.empty((self.N, len(self.x0)))
        x = self.x0.copy()
        xs[0] = x
        for i, u in enumerate(controls):
            y = x + 0.5 * h * (frame.matrix(x) @ u)
            x = x + h * (frame.matrix(y) @ u)
            ys[i] = y
            xs[i + 1] = x
        return xs, ys

    def _running(self, xs: np.ndarray, controls: np.ndarray):
        """L, ∂L/∂x, ∂L/∂u per interval; rows with u = 0 contribute nothing."""
        metric = self.system.metric
        active = np.any(controls != 0.0, axis=1)
        values = np.zeros(self.N)
        dx = np.zeros((self.N, xs.shape[1]))
        du = np.zeros_like(controls)
        if np.any(active):
            values[active] = metric.lagrangian_batch(xs[:-1][active], controls[active])
            dx[active] = metric.grad_x_batch(xs[:-1][active], controls[active])
            du[active] = metric.grad_u_batch(xs[:-1][active], controls[active])
        return values, dx, du

    def objective(self, controls: np.ndarray, mu: float) -> float:
        xs, _ = self.forward(controls)
        miss = self.system.chart.wrap(xs[-1] - self.x1)
        lagrangian = self.system.metric.lagrangian_batch(xs[:-1], controls)
        return float(self.h * np.sum(lagrangian) + mu * miss @ miss)

    def gradient(self, controls: np.ndarray, mu: float) -> Tuple[float, np.ndarray]:
        """Objective and its exact gradient by the discrete adjoint."""
        h = self.h
        xs, ys = self.forward(controls)
        values, dLdx, dLdu = self._running(xs, controls)
        miss = self.system.chart.wrap(xs[-1] - self.x1)
        cost = float(h * values.sum() + mu * miss @ miss)

        X_x, dX_x = self.system.frame.jacobian_batch(xs[:-1])
        X_y, dX_y = self.system.frame.jacobian_batch(ys)
        # B[i, j, m] = Σ_a ∂_m X_a^j u_a
        B_x = np.einsum("ijam,ia->ijm", dX_x, controls)
        B_y = np.einsum("ijam,ia->ijm", dX_y, controls)
        eye = np.eye(xs.shape[1])

        grad = np.zeros_like(controls)
        adjoint = 2.0 * mu * miss
        for i in range(self.N - 1, -1, -1):
            dy_dx = eye + 0.5 * h * B_x[i]
            dphi_dx = eye + h * B_y[i] @ dy_dx
            dphi_du = h * X_y[i] + 0.5 * h * h * B_y[i] @ X_x[i]
            grad[i] = h * dLdu[i] + dphi_du.T @ adjoint
            adjoint = h * dLdx[i] + dphi_dx.T @ adjoint
        return cost, grad


def _initial_controls(system: "System", x0: np.ndarray, x1: np.ndarray, N: int, seed: int) -> np.ndarray:
    _, _, _, A = projection_data(system, x0)
    straight = A @ system.chart.wrap(x1 - x0)
    rng = np.random.default_rng(seed)
    scale = max(float(np.linalg.norm(x1 - x0)), 1e-3)
    phases = np.linspace(0.0, 2.0 * np.pi, N, endpoint=False)
    wiggle = 0.1 * scale * np.outer(np.sin(phases), rng.standard_normal(system.k))
    wiggle += 0.1 * scale * np.outer(np.cos(phases), rng.standard_normal(system.k))
    return np.tile(straight, (N, 1)) + wiggle


def sampled_controls(trajectory: Trajectory, N: int) -> np.ndarray:
    """Controls of ``trajectory`` with time rescaled to [0, 1], sampled at the N interval midpoints."""
    duration = trajectory.duration
    mids = trajectory.times[0] + duration * (np.arange(N) + 0.5) / N
    return duration * CubicSpline(trajectory.times, trajectory.controls)(mids)


def _descend(problem: DirectProblem, controls: np.ndarray, mu: float, options: DirectOptions) -> np.ndarray:
    """Steepest descent; Barzilai–Borwein trial steps, Armijo backtracking."""
    cost, grad = problem.gradient(controls, mu)
    step = 1.0
    previous = None
    idle = 0
    for iteration in range(options.max_iters):
        norm2 = float(np.sum(grad * grad))
        if np.sqrt(norm2) <= options.grad_tol:
            break
        if previous is not None:
            s = controls - previous[0]
            y = grad - previous[1]
            sy = float(np.sum(s * y))
            if sy > 0:
                step = float(np.sum(s * s)) / sy
        for _ in range(MAX_BACKTRACKS):
            trial = controls - step * grad
            trial_cost = problem.objective(trial, mu)
            if trial_cost <= cost - ARMIJO * step * norm2:
                break
            step *= 0.5
        else:
            logger.debug(f"Direct method: line search stalled at iteration {iteration}")
            break
        previous = (controls, grad)
        controls = trial
        idle = idle + 1 if cost - trial_cost <= options.stall_tol * abs(cost) else 0
        cost, grad = problem.gradient(controls, mu)
        if idle >= options.stall_iters:
            logger.debug(f"Direct method: no progress for {idle} iterations at iteration {iteration}")
            break
    return controls


def direct_solve(
    system: "System",
    x0: Sequence[float],
    x1: Sequence[float],
    N: int = 200,
    options: Optional[DirectOptions] = None,
    initial_controls: Optional[np.ndarray] = None,
) -> Tuple[float, np.ndarray]:
    """
    Brute-force length minimizer over N piecewise-constant controls on [0, 1].

    The descent runs on the energy ΣL h, which has the length minimizers at
    fixed duration, with the penalty μ raised between rounds; the returned
    cost is the discrete length Σ F(u_i) h. ``initial_controls`` (N×k) replaces
    the straight-line start, e.g. ``sampled_controls`` of a shot geodesic.

    Raises:
        NoConvergence: if the final endpoint error exceeds options.endpoint_tol
    """
    options = (options or DirectOptions()).model_copy(update={"N": N})
    if N < 10:
        raise ValueError(f"direct_solve needs N ≥ 10, got {N}")
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    problem = DirectProblem(system, x0, x1, N)
    if initial_controls is None:
        controls = _initial_controls(system, x0, x1, N, options.rng_seed)
    else:
        controls = np.array(initial_controls, dtype=float)
        if controls.shape != (N, system.k):
            raise ValueError(f"initial_controls must have shape ({N}, {system.k}), got {controls.shape}")
    mu = options.mu0
    for round_index in range(options.rounds):
        controls = _descend(problem, controls, mu, options)
        logger.debug(f"Direct method round {round_index + 1}: μ={mu:g}, cost {problem.objective(controls, mu):.9f}")
        mu *= options.growth
    xs, _ = problem.forward(controls)
    miss = float(np.linalg.norm(system.chart.wrap(xs[-1] - x1)))
    if miss > options.endpoint_tol:
        raise NoConvergence(f"Direct method ended {miss:.3e} away from the target", miss)
    speeds = np.sqrt(np.maximum(2.0 * system.metric.lagrangian_batch(xs[:-1], controls), 0.0))
    cost = float(problem.h * speeds.sum())
    logger.info(f"Direct method on {system.name}: cost {cost:.9f}, endpoint error {miss:.3e}")
    return cost, controls
