"""
Shooting and direct-method options and results.
"""
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..config import settings
from ..dynamics.models import FlowOptions, IntegratorKind, Trajectory


def _shooting_flow() -> FlowOptions:
    return FlowOptions(method=IntegratorKind.RK45, rtol=1e-11, atol=1e-13)


class ShootingOptions(BaseModel):
    """Multi-start Levenberg–Marquardt settings.

    Restarts run on a coarse fixed-step flow; the shortest candidates are then
    refined on ``flow`` to ``endpoint_tol``.
    """

    restarts: int = Field(default_factory=lambda: settings.shooting_restarts, ge=1, description="Initial momenta tried")
    max_newton_iters: int = Field(
        default_factory=lambda: settings.shooting_max_iters, ge=1, description="LM iterations per restart"
    )
    endpoint_tol: float = Field(
        default_factory=lambda: settings.shooting_endpoint_tol, gt=0, description="Accepted endpoint error"
    )
    time_horizon: float = Field(1.0, gt=0, description="Shooting time; speed absorbs the length")
    rng_seed: int = Field(0, description="Seed for the restart momenta")
    batch_size: int = Field(
        default_factory=lambda: settings.shooting_batch_size, ge=1, description="Restarts evaluated together"
    )
    min_converged: int = Field(
        default_factory=lambda: settings.shooting_min_converged,
        ge=1,
        description="Restarts that must converge before a batch without improvement ends the search",
    )
    threads: int = Field(default_factory=lambda: settings.threads, ge=0, description="Worker threads, 0 for all cores")
    momentum_scale: float = Field(np.pi, gt=0, description="Spread of the random annihilator component")
    initial_momenta: Optional[List[List[float]]] = Field(
        None, description="Momenta tried before the lifted displacement and the random draws"
    )
    coarse_dt: float = Field(1e-2, gt=0, description="RK4 step of the restart stage")
    coarse_tol: float = Field(1e-6, gt=0, description="Endpoint error accepting a restart in the coarse stage")
    polish_window: float = Field(
        1e-3, ge=0, description="Relative length window of coarse candidates refined with the fine flow"
    )
    flow: FlowOptions = Field(default_factory=_shooting_flow, description="Integrator for the endpoint map")
    samples: int = Field(401, ge=2, description="Samples of the reported unit-speed trajectory")


class GeodesicResult(BaseModel):
    """Outcome of a two-point shooting problem."""

    x0: np.ndarray
    x1: np.ndarray
    p0: np.ndarray = Field(..., description="Initial momentum normalized to η = ½")
    trajectory: Trajectory = Field(..., description="Unit-speed geodesic from x0, sampled on [0, length]")
    length: float
    endpoint_error: float
    converged: bool
    restarts_used: int = Field(0, description="Restarts evaluated before stopping")

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    def summary(self, distance: Optional[float] = None) -> Dict[str, Any]:
        """JSON-ready summary."""
        return {
            "distance": self.length if distance is None else distance,
            "p0": [float(v) for v in self.p0],
            "converged": self.converged,
            "endpoint_error": self.endpoint_error,
            "length": self.length,
            "restarts_used": self.restarts_used,
        }


class DirectOptions(BaseModel):
    """Penalty gradient-descent settings for the direct method."""

    N: int = Field(200, ge=10, description="Number of control intervals")
    mu0: float = Field(100.0, gt=0, description="Initial endpoint penalty")
    rounds: int = Field(3, ge=1, description="Penalty continuation rounds")
    growth: float = Field(10.0, gt=1, description="Penalty factor between rounds")
    max_iters: int = Field(4000, ge=1, description="Descent iterations per round")
    grad_tol: float = Field(1e-9, gt=0, description="Stop a round when the gradient norm falls below")
    stall_tol: float = Field(1e-12, ge=0, description="Relative cost decrease counted as no progress")
    stall_iters: int = Field(3, ge=1, description="End a round after this many iterations without progress")
    endpoint_tol: float = Field(1e-2, gt=0, description="Accepted final endpoint error")
    rng_seed: int = Field(0, description="Seed for the initial control perturbation")
