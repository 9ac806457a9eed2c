"""
Time stepping for autonomous and time-dependent ODEs y' = f(t, y).
"""
import math
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import StepFailure
from ..logger import logger

RightHandSide = Callable[[float, np.ndarray], np.ndarray]


def rk4(fun: RightHandSide, T: float, y0: np.ndarray, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Classical RK4 on [0, T] with the largest step ≤ dt dividing T evenly."""
    steps = max(1, int(math.ceil(T / dt - 1e-9)))
    h = T / steps
    times = np.linspace(0.0, T, steps + 1)
    ys = np.empty((steps + 1, len(y0)))
    y = np.array(y0, dtype=float)
    ys[0] = y
    for i in range(steps):
        t = times[i]
        k1 = fun(t, y)
        k2 = fun(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = fun(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = fun(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i + 1] = y
    return times, ys


def rk4_on_grid(fun: RightHandSide, times: np.ndarray, y0: np.ndarray) -> np.ndarray:
    """RK4 through the given (possibly non-uniform) sample times."""
    ys = np.empty((len(times), len(y0)))
    y = np.array(y0, dtype=float)
    ys[0] = y
    for i in range(len(times) - 1):
        t, h = times[i], times[i + 1] - times[i]
        k1 = fun(t, y)
        k2 = fun(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = fun(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = fun(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i + 1] = y
    return ys


def adaptive(
    fun: RightHandSide,
    T: float,
    y0: np.ndarray,
    rtol: float,
    atol: float,
    samples: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dormand–Prince RK45 on [0, T].

    Raises:
        StepFailure: when the step size underflows or the solver gives up
    """
    t_eval = None if samples is None else np.linspace(0.0, T, samples)
    solution = solve_ivp(fun, (0.0, T), np.asarray(y0, dtype=float), method="RK45", rtol=rtol, atol=atol, t_eval=t_eval)
    if not solution.success:
        raise StepFailure(f"Adaptive integration failed at t={solution.t[-1]:.6g}: {solution.message}")
    logger.debug(f"RK45 finished with {solution.nfev} evaluations and {len(solution.t)} samples")
    return solution.t, solution.y.T
