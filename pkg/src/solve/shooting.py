"""
Endpoint map, multi-start shooting, length and distance.

Shooting runs in two stages. Restarts are solved together by a lock-step
Levenberg–Marquardt iteration on a coarse fixed-step flow; the shortest
coarse candidates are then refined one at a time on the fine flow.
"""
import asyncio
import os
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from ..dynamics.flow import flow
from ..dynamics.hamiltonian import SubHamiltonian
from ..dynamics.integrators import adaptive, rk4
from ..dynamics.models import ExtremalState, FlowOptions, IntegratorKind, Trajectory
from ..errors import DomainError, NoConvergence, NonHorizontal, NotGenerating, RegularityError, StepFailure
from ..geometry.frame import annihilator_basis, bracket_generating_step, lift_covector, projection_data
from ..logger import logger
from .models import GeodesicResult, ShootingOptions

if TYPE_CHECKING:
    from ..systems.models import System

HORIZONTALITY_TOL = 1e-6
DIFFERENCE_STEP = 1e-7
INITIAL_DAMPING = 1e-3
MAX_DAMPING = 1e16
SAME_MOMENTUM = 1e-6

FLOW_ERRORS = (DomainError, RegularityError, StepFailure, NoConvergence, np.linalg.LinAlgError)


def _integrate(field, T: float, y0: np.ndarray, options: FlowOptions) -> np.ndarray:
    if options.method == IntegratorKind.RK45:
        _, ys = adaptive(field, T, y0, options.rtol, options.atol)
    else:
        _, ys = rk4(field, T, y0, options.dt)
    return ys[-1]


def endpoint_map(
    system: "System",
    x0: Sequence[float],
    p0: Sequence[float],
    T: float,
    options: Optional[FlowOptions] = None,
) -> np.ndarray:
    """Base point reached at time T by the flow from (x0, p0); x0 itself for T = 0."""
    x0 = np.asarray(x0, dtype=float)
    if T == 0:
        return x0.copy()
    options = options or FlowOptions()
    n = system.n
    hamiltonian = SubHamiltonian(system)

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        x_dot, p_dot, _ = hamiltonian.vector_field(y[:n], y[n:])
        return np.concatenate([x_dot, p_dot])

    return _integrate(field, T, np.concatenate([x0, np.asarray(p0, dtype=float)]), options)[:n]


def endpoint_map_batch(
    system: "System",
    x0: Sequence[float],
    momenta: np.ndarray,
    T: float,
    options: Optional[FlowOptions] = None,
) -> np.ndarray:
    """Endpoints of the flows from x0 for every row of ``momenta``, integrated as one stacked system.

    An adaptive integrator takes the steps of the hardest member.
    """
    x0 = np.asarray(x0, dtype=float)
    momenta = np.atleast_2d(np.asarray(momenta, dtype=float))
    count, n = momenta.shape
    if T == 0:
        return np.tile(x0, (count, 1))
    options = options or FlowOptions()
    hamiltonian = SubHamiltonian(system)

    def field(_t: float, y: np.ndarray) -> np.ndarray:
        states = y.reshape(count, 2 * n)
        x_dot, p_dot = hamiltonian.vector_field_batch(states[:, :n], states[:, n:])
        return np.concatenate([x_dot, p_dot], axis=1).ravel()

    y0 = np.concatenate([np.tile(x0, (count, 1)), momenta], axis=1).ravel()
    return _integrate(field, T, y0, options).reshape(count, 2 * n)[:, :n]


def length(system: "System", trajectory: Trajectory, tol: float = HORIZONTALITY_TOL) -> float:
    """
    ∫ F(σ̇) dt by composite Simpson on the sample grid.

    Raises:
        NonHorizontal: if the horizontality channel exceeds tol
    """
    worst = float(trajectory.horizontality.max())
    if worst > tol:
        raise NonHorizontal(f"Curve leaves the distribution by {worst:.3e} (tolerance {tol:.1e})")
    if len(trajectory.times) < 2:
        return 0.0
    return float(simpson(trajectory.speed, x=trajectory.times))


def _initial_momenta(system: "System", x0: np.ndarray, delta: np.ndarray, options: ShootingOptions) -> List[np.ndarray]:
    """User momenta first, then the lift of the horizontal displacement, then seeded random draws."""
    rng = np.random.default_rng(options.rng_seed)
    _, _, _, A = projection_data(system, x0)
    annihilator = annihilator_basis(system, x0)
    size = float(np.linalg.norm(delta))
    metric_matrix = np.asarray(system.metric.quadratic_part(x0), dtype=float)
    guesses = [np.asarray(p, dtype=float) for p in options.initial_momenta or []]
    guesses.append(lift_covector(system, x0, metric_matrix @ (A @ delta)))
    while len(guesses) < options.restarts:
        p_hat = rng.standard_normal(system.k) * size
        gamma = annihilator @ rng.standard_normal(annihilator.shape[1]) * options.momentum_scale
        guesses.append(lift_covector(system, x0, p_hat) + gamma)
    return guesses[: options.restarts]


class EndpointProblem:
    """Residual x(T) − x1 of the flow from x0, wrapped on periodic coordinates, for stacks of momenta."""

    def __init__(self, system: "System", x0: np.ndarray, x1: np.ndarray, T: float, options: FlowOptions):
        self.system = system
        self.x0 = x0
        self.x1 = x1
        self.T = T
        self.options = options

    def residuals(self, momenta: np.ndarray) -> np.ndarray:
        """One residual row per momentum; rows whose flow fails are NaN."""
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                ends = endpoint_map_batch(self.system, self.x0, momenta, self.T, self.options)
        except FLOW_ERRORS as e:
            if len(momenta) == 1:
                logger.debug(f"Flow failed from momentum {momenta[0].tolist()}: {e}")
                return np.full((1, self.system.n), np.nan)
            # isolate the failing members
            return np.vstack([self.residuals(m[None, :]) for m in momenta])
        return self.system.chart.wrap(ends - self.x1)

    def linearize(self, momenta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Residuals and forward-difference Jacobians of every row, integrated in one stack."""
        count, n = momenta.shape
        steps = DIFFERENCE_STEP * np.maximum(1.0, np.linalg.norm(momenta, axis=1))
        bundle = np.repeat(momenta[:, None, :], n + 1, axis=1)
        bundle[:, 1:, :] += steps[:, None, None] * np.eye(n)[None, :, :]
        values = self.residuals(bundle.reshape(-1, n)).reshape(count, n + 1, -1)
        f = values[:, 0, :]
        J = np.transpose(values[:, 1:, :] - f[:, None, :], (0, 2, 1)) / steps[:, None, None]
        return f, J


def levenberg_marquardt(
    problem: EndpointProblem, guesses: np.ndarray, tol: float, max_iters: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Damped Gauss–Newton on every row of ``guesses`` in lock step.

    Damping starts at 1e-3·max diag(JᵀJ); an accepted step with gain ratio ρ
    scales it by max(1/3, 1 − (2ρ − 1)³), a rejected one by a doubling factor.
    Rows are frozen once their residual norm is at most ``tol`` or they stall.
    Returns the final momenta and residual norms (inf for failed rows).
    """
    p = np.array(guesses, dtype=float)
    count, n = p.shape
    f, J = problem.linearize(p)
    reached = np.all(np.isfinite(f), axis=1)
    finite = reached & np.all(np.isfinite(J), axis=(1, 2))
    errors = np.where(reached, np.linalg.norm(np.where(reached[:, None], f, 0.0), axis=1), np.inf)
    clean = np.where(finite[:, None, None], J, 0.0)
    diagonal = np.einsum("bij,bij->bj", clean, clean)
    mu = INITIAL_DAMPING * np.maximum(diagonal.max(axis=1), 1e-12)
    v = np.full(count, 2.0)
    active = finite & (errors > tol)
    eye = np.eye(n)

    for _ in range(max_iters):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        Jr, fr = J[rows], f[rows]
        g = np.einsum("bij,bi->bj", Jr, fr)
        normal = np.einsum("bij,bik->bjk", Jr, Jr) + mu[rows, None, None] * eye
        step = np.linalg.solve(normal, -g[..., None])[..., 0]
        trial = p[rows] + step
        f_new, J_new = problem.linearize(trial)

        old = errors[rows] ** 2
        new = np.sum(f_new**2, axis=1)
        predicted = old - np.sum((fr + np.einsum("bij,bj->bi", Jr, step)) ** 2, axis=1)
        usable = np.all(np.isfinite(f_new), axis=1) & np.all(np.isfinite(J_new), axis=(1, 2)) & (predicted > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(usable, (old - new) / np.where(predicted > 0, predicted, 1.0), -1.0)
        accept = usable & (rho > 0)

        taken = rows[accept]
        p[taken] = trial[accept]
        f[taken] = f_new[accept]
        J[taken] = J_new[accept]
        errors[taken] = np.sqrt(new[accept])
        mu[taken] *= np.maximum(1.0 / 3.0, 1.0 - (2.0 * rho[accept] - 1.0) ** 3)
        v[taken] = 2.0

        refused = rows[~accept]
        mu[refused] *= v[refused]
        v[refused] *= 2.0

        tiny = np.linalg.norm(step, axis=1) <= 1e-15 * (1.0 + np.linalg.norm(p[rows], axis=1))
        active[rows] = (errors[rows] > tol) & (mu[rows] < MAX_DAMPING) & ~tiny
    return p, errors


Outcome = Tuple[int, Optional[np.ndarray], float, Optional[float]]


def _coarse_batch(
    problem: EndpointProblem, hamiltonian: SubHamiltonian, start: int, batch: List[np.ndarray], options: ShootingOptions
) -> List[Outcome]:
    """(restart index, momentum, coarse endpoint error, length) per restart; momentum and length are None on failure."""
    momenta, errors = levenberg_marquardt(problem, np.array(batch), options.coarse_tol, options.max_newton_iters)
    outcomes = []
    for offset, (p0, error) in enumerate(zip(momenta, errors)):
        index = start + offset
        if not np.isfinite(error):
            logger.debug(f"Restart {index} failed")
            outcomes.append((index, None, float("inf"), None))
            continue
        logger.debug(f"Restart {index}: coarse endpoint error {error:.3e}")
        total = None
        if error <= options.coarse_tol:
            try:
                eta = hamiltonian.eta(problem.x0, p0)
            except FLOW_ERRORS as e:
                logger.debug(f"Restart {index} has no valid length: {e}")
                eta = 0.0
            if eta > 0:
                total = float(np.sqrt(2.0 * eta)) * problem.T
        outcomes.append((index, p0, float(error), total))
    return outcomes


async def _run_restarts(
    problem: EndpointProblem, hamiltonian: SubHamiltonian, guesses: List[np.ndarray], options: ShootingOptions
) -> List[Outcome]:
    """
    Coarse stage over fixed batches, ``threads`` batches at a time.

    Batches are inspected in order: the search ends after the first batch that
    leaves the best length unchanged once ``min_converged`` restarts have
    converged. Later batches of the same wave are discarded, so the outcome
    does not depend on the number of workers.
    """
    workers = options.threads or os.cpu_count() or 1
    gate = asyncio.Semaphore(workers)
    size = options.batch_size
    batches = [guesses[start : start + size] for start in range(0, len(guesses), size)]

    async def run(number: int):
        async with gate:
            return await asyncio.to_thread(_coarse_batch, problem, hamiltonian, number * size, batches[number], options)

    outcomes: List[Outcome] = []
    converged = 0
    best = float("inf")
    for wave in range(0, len(batches), workers):
        results = await asyncio.gather(*[run(number) for number in range(wave, min(wave + workers, len(batches)))])
        for batch in results:
            outcomes.extend(batch)
            lengths = [total for _, _, _, total in batch if total is not None]
            converged += len(lengths)
            previous = best
            best = min([best] + lengths)
            if converged >= options.min_converged and np.isfinite(previous) and best >= previous:
                logger.debug(f"Best length {best:.9f} unchanged over a batch after {len(outcomes)} restarts")
                return outcomes
    return outcomes


def _distinct(candidates: List[Outcome]) -> List[Outcome]:
    """Candidates sorted by (length, index) with repeated momenta removed."""
    kept: List[Outcome] = []
    for candidate in sorted(candidates, key=lambda c: (c[3], c[0])):
        p0 = candidate[1]
        if any(np.linalg.norm(p0 - other[1]) <= SAME_MOMENTUM * (1.0 + np.linalg.norm(other[1])) for other in kept):
            continue
        kept.append(candidate)
    return kept


def _refine(
    problem: EndpointProblem, hamiltonian: SubHamiltonian, candidates: List[Outcome], options: ShootingOptions
) -> List[Tuple[float, int, np.ndarray, float]]:
    """
    Fine-flow LM from the coarse candidates within ``polish_window`` of the shortest.

    When none of them reaches ``endpoint_tol`` the remaining candidates are
    tried in order of coarse length.
    """
    shortest = candidates[0][3]
    cut = sum(1 for c in candidates if c[3] <= shortest * (1.0 + options.polish_window))
    refined = []
    for group in (candidates[:cut], candidates[cut:]):
        for index, p0, _, _ in group:
            momenta, errors = levenberg_marquardt(problem, p0[None, :], options.endpoint_tol, options.max_newton_iters)
            error = float(errors[0])
            if error > options.endpoint_tol:
                logger.debug(f"Restart {index} did not refine: endpoint error {error:.3e}")
                continue
            try:
                eta = hamiltonian.eta(problem.x0, momenta[0])
            except FLOW_ERRORS as e:
                logger.debug(f"Restart {index} has no valid length: {e}")
                continue
            if eta > 0:
                refined.append((float(np.sqrt(2.0 * eta)) * problem.T, index, momenta[0], error))
        if refined:
            break
    return refined


def _zero_result(system: "System", x0: np.ndarray, x1: np.ndarray, error: float) -> GeodesicResult:
    n, k = system.n, system.k
    trajectory = Trajectory(
        times=[0.0],
        xs=[x0],
        ps=[np.zeros(n)],
        controls=[np.zeros(k)],
        velocities=[np.zeros(n)],
        eta=[0.0],
        speed=[0.0],
        horizontality=[0.0],
    )
    return GeodesicResult(
        x0=x0, x1=x1, p0=np.zeros(n), trajectory=trajectory, length=0.0, endpoint_error=error, converged=True
    )


def shoot(
    system: "System", x0: Sequence[float], x1: Sequence[float], options: Optional[ShootingOptions] = None
) -> GeodesicResult:
    """
    Normal geodesic from x0 to x1 by multi-start shooting on the initial momentum.

    Among refined restarts the shortest wins, ties going to the lower restart
    index.

    Raises:
        NoConvergence: if no restart reaches the endpoint tolerance
    """
    options = options or ShootingOptions()
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    delta = system.chart.wrap(x1 - x0)
    if float(np.linalg.norm(delta)) <= options.endpoint_tol:
        return _zero_result(system, x0, x1, float(np.linalg.norm(delta)))

    T = options.time_horizon
    hamiltonian = SubHamiltonian(system)
    coarse = EndpointProblem(system, x0, x1, T, FlowOptions(method=IntegratorKind.RK4, dt=options.coarse_dt))
    guesses = _initial_momenta(system, x0, delta, options)
    outcomes = asyncio.run(_run_restarts(coarse, hamiltonian, guesses, options))
    best_error = min((e for _, _, e, _ in outcomes), default=float("inf"))
    candidates = _distinct([c for c in outcomes if c[3] is not None])
    refined = []
    if candidates:
        refined = _refine(EndpointProblem(system, x0, x1, T, options.flow), hamiltonian, candidates, options)
    if not refined:
        raise NoConvergence(f"Shooting from {x0.tolist()} to {x1.tolist()} failed in {len(outcomes)} restarts", best_error)
    refined.sort(key=lambda c: (c[0], c[1]))
    total, index, p0, error = refined[0]
    logger.info(
        f"Shooting on {system.name}: {len(candidates)}/{len(outcomes)} restarts converged, "
        f"best length {total:.9f} from restart {index}"
    )

    # Reparametrize to unit speed: η = ½ and duration equal to the length
    unit_p0 = p0 / np.sqrt(2.0 * hamiltonian.eta(x0, p0))
    report = options.flow.model_copy(update={"samples": options.samples})
    trajectory = flow(system, ExtremalState(x=x0, p=unit_p0), total, report)
    return GeodesicResult(
        x0=x0,
        x1=x1,
        p0=unit_p0,
        trajectory=trajectory,
        length=total,
        endpoint_error=error,
        converged=True,
        restarts_used=len(outcomes),
    )


def distance(
    system: "System", x0: Sequence[float], x1: Sequence[float], options: Optional[ShootingOptions] = None
) -> Tuple[float, GeodesicResult]:
    """
    Sub-Finsler distance as the length of the best shot geodesic.

    Raises:
        NoConvergence: propagated from shoot
    """
    try:
        step = bracket_generating_step(system, x0, max_depth=system.n)
        logger.debug(f"Bracket-generating step {step} at {list(x0)}")
    except NotGenerating as e:
        logger.warning(f"{e}; the distance may be infinite")
    result = shoot(system, x0, x1, options)
    return result.length, result
