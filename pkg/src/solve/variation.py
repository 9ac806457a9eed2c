"""
First variation of the length functional along horizontal curves.

Variations live in control space: the curve is regenerated from perturbed
controls, so every varied curve is horizontal by construction.
"""
from typing import TYPE_CHECKING

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.linalg import null_space

from ..dynamics.models import Trajectory
from ..errors import NonHorizontal
from ..logger import logger

if TYPE_CHECKING:
    from ..systems.models import System

EPSILON = 1e-5
JACOBIAN_STEP = 1e-6
BUMPS = 6


class ControlCurve:
    """Discrete horizontal curve: RK4 through control values at grid nodes and midpoints."""

    def __init__(self, system: "System", trajectory: Trajectory):
        self.system = system
        self.times = trajectory.times
        self.x0 = trajectory.xs[0]
        self.mid_times = 0.5 * (self.times[1:] + self.times[:-1])
        self.nodes = trajectory.controls
        self.mids = CubicSpline(self.times, trajectory.controls, axis=0)(self.mid_times)

    def endpoints(self, nodes: np.ndarray, mids: np.ndarray) -> np.ndarray:
        frame = self.system.frame
        xs = np.empty((len(self.times), len(self.x0)))
        x = np.array(self.x0, dtype=float)
        xs[0] = x
        for i, h in enumerate(np.diff(self.times)):
            k1 = frame.matrix(x) @ nodes[i]
            k2 = frame.matrix(x + 0.5 * h * k1) @ mids[i]
            k3 = frame.matrix(x + 0.5 * h * k2) @ mids[i]
            k4 = frame.matrix(x + h * k3) @ nodes[i + 1]
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            xs[i + 1] = x
        return xs

    def length(self, nodes: np.ndarray, mids: np.ndarray) -> float:
        xs = self.endpoints(nodes, mids)
        lagrangian = self.system.metric.lagrangian_batch(xs, nodes)
        return float(simpson(np.sqrt(np.maximum(2.0 * lagrangian, 0.0)), x=self.times))

    def basis(self, count: int):
        """Sine bumps sin(mπs) times each fiber direction, at nodes and midpoints."""
        span = self.times[-1] - self.times[0]
        s_nodes = (self.times - self.times[0]) / span
        s_mids = (self.mid_times - self.times[0]) / span
        k = self.nodes.shape[1]
        out = []
        for m in range(1, count + 1):
            for a in range(k):
                at_nodes = np.zeros_like(self.nodes)
                at_mids = np.zeros_like(self.mids)
                at_nodes[:, a] = np.sin(m * np.pi * s_nodes)
                at_mids[:, a] = np.sin(m * np.pi * s_mids)
                out.append((at_nodes, at_mids))
        return out


def first_variation_residual(
    system: "System", trajectory: Trajectory, num_variations: int = 8, rng_seed: int = 0
) -> float:
    """
    max |dℓ(σ)·v| / ‖v‖ over random control variations that fix both endpoints to first order.

    Raises:
        NonHorizontal: if the trajectory leaves the distribution
    """
    worst = float(trajectory.horizontality.max())
    if worst > 1e-6:
        raise NonHorizontal(f"Variation needs a horizontal curve, residual {worst:.3e}")
    if len(trajectory.times) < 3:
        return 0.0
    curve = ControlCurve(system, trajectory)
    basis = curve.basis(max(BUMPS, system.n + 2))

    # Endpoint differential restricted to the bump subspace
    columns = []
    for at_nodes, at_mids in basis:
        plus = curve.endpoints(curve.nodes + JACOBIAN_STEP * at_nodes, curve.mids + JACOBIAN_STEP * at_mids)[-1]
        minus = curve.endpoints(curve.nodes - JACOBIAN_STEP * at_nodes, curve.mids - JACOBIAN_STEP * at_mids)[-1]
        columns.append(system.chart.wrap(plus - minus) / (2.0 * JACOBIAN_STEP))
    kernel = null_space(np.array(columns).T)
    if kernel.shape[1] == 0:
        logger.warning("Endpoint differential has no kernel on the variation subspace")
        return 0.0

    rng = np.random.default_rng(rng_seed)
    worst = 0.0
    for _ in range(num_variations):
        coefficients = kernel @ rng.standard_normal(kernel.shape[1])
        v_nodes = sum(c * b[0] for c, b in zip(coefficients, basis))
        v_mids = sum(c * b[1] for c, b in zip(coefficients, basis))
        size = float(np.sqrt(simpson(np.sum(v_nodes ** 2, axis=1), x=curve.times)))
        v_nodes, v_mids = v_nodes / size, v_mids / size
        plus = curve.length(curve.nodes + EPSILON * v_nodes, curve.mids + EPSILON * v_mids)
        minus = curve.length(curve.nodes - EPSILON * v_nodes, curve.mids - EPSILON * v_mids)
        worst = max(worst, abs(plus - minus) / (2.0 * EPSILON))
    logger.info(f"First variation residual on {system.name}: {worst:.3e} over {num_variations} variations")
    return worst
