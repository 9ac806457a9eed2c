"""
Tests for shooting, lengths, the direct method and the first-variation check.
"""
import time

import numpy as np
import pytest

from src.dynamics import ExtremalState, FlowOptions, IntegratorKind, flow, horizontal_curve
from src.errors import NonHorizontal
from src.solve import (
    DirectOptions,
    ShootingOptions,
    direct_solve,
    distance,
    endpoint_map,
    endpoint_map_batch,
    first_variation_residual,
    length,
    sampled_controls,
    shoot,
)
from src.solve.shooting import EndpointProblem, levenberg_marquardt


@pytest.fixture
def quick_shooting():
    return ShootingOptions(restarts=8, batch_size=4, min_converged=1, threads=2)


def test_endpoint_map_at_zero_time_is_identity(heisenberg):
    np.testing.assert_array_equal(endpoint_map(heisenberg, [0.1, 0.2, 0.3], [1.0, 0.0, 0.0], 0.0), [0.1, 0.2, 0.3])


def test_endpoint_map_follows_the_flow(heisenberg):
    options = FlowOptions(dt=1e-2)
    end = endpoint_map(heisenberg, [0.0, 0.0, 0.0], [0.6, 0.8, 1.5], 1.0, options)
    trajectory = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.5]), 1.0, options)
    np.testing.assert_allclose(end, trajectory.xs[-1], atol=1e-14)


def test_heisenberg_horizontal_segment(heisenberg, quick_shooting):
    result = shoot(heisenberg, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], quick_shooting)
    assert result.converged
    assert result.length == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(result.p0, [1.0, 0.0, 0.0], atol=1e-6)
    # Reported trajectory is unit speed and ends at the target
    np.testing.assert_allclose(result.trajectory.speed, 1.0, atol=1e-6)
    np.testing.assert_allclose(result.trajectory.xs[-1], [1.0, 0.0, 0.0], atol=1e-6)


def test_euclidean_distance(euclidean3, quick_shooting):
    value, result = distance(euclidean3, [0.0, 0.0, 0.0], [3.0, 4.0, 0.0], quick_shooting)
    assert value == pytest.approx(5.0, abs=1e-6)
    assert result.summary()["distance"] == pytest.approx(5.0, abs=1e-6)


def test_same_point_has_zero_distance(heisenberg):
    value, result = distance(heisenberg, [0.5, 0.5, 0.5], [0.5, 0.5, 0.5])
    assert value == 0.0
    assert result.trajectory.times.shape == (1,)


def test_shooting_is_reproducible(heisenberg):
    options = ShootingOptions(restarts=6, batch_size=3, min_converged=2, rng_seed=7, threads=1)
    first = shoot(heisenberg, [0.0, 0.0, 0.0], [0.5, 0.2, 0.1], options)
    second = shoot(heisenberg, [0.0, 0.0, 0.0], [0.5, 0.2, 0.1], options.model_copy(update={"threads": 3}))
    assert first.length == second.length
    np.testing.assert_array_equal(first.p0, second.p0)


def test_length_of_a_control_curve(heisenberg):
    curve = horizontal_curve(heisenberg, [0.0, 0.0, 0.0], lambda _t: [0.6, 0.8], 2.0, FlowOptions(dt=1e-2))
    assert length(heisenberg, curve) == pytest.approx(2.0, abs=1e-10)


def test_length_rejects_non_horizontal_curves(heisenberg):
    trajectory = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 1.0, FlowOptions(dt=0.1))
    tilted = trajectory.model_copy(update={"horizontality": np.full(len(trajectory.times), 1e-3)})
    with pytest.raises(NonHorizontal):
        length(heisenberg, tilted)


def test_geodesic_is_critical(heisenberg):
    options = FlowOptions(method=IntegratorKind.RK45, rtol=1e-11, atol=1e-13, samples=401)
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 2.0]), 1.0, options)
    assert first_variation_residual(heisenberg, geodesic, num_variations=6) <= 1e-4


def test_circular_arc_is_not_critical(euclidean3):
    arc = horizontal_curve(
        euclidean3, [0.0, 0.0, 0.0], lambda t: [np.cos(3.0 * t), np.sin(3.0 * t), 0.0], 1.0, FlowOptions(dt=1e-2)
    )
    assert first_variation_residual(euclidean3, arc, num_variations=6) >= 1e-2


def test_batched_endpoints_match_single_flows(heisenberg):
    momenta = np.array([[0.6, 0.8, 1.5], [1.0, 0.0, 0.0], [-0.3, 0.4, -2.0]])
    options = FlowOptions(dt=1e-2)
    ends = endpoint_map_batch(heisenberg, [0.1, 0.0, 0.2], momenta, 1.0, options)
    assert ends.shape == (3, 3)
    for p, end in zip(momenta, ends):
        np.testing.assert_allclose(end, endpoint_map(heisenberg, [0.1, 0.0, 0.2], p, 1.0, options), atol=1e-12)


@pytest.mark.parametrize("loops", [(2, 1), (1, 2)])
def test_shortest_geodesic_wins_whatever_the_restart_order(heisenberg, loops):
    # k-loop geodesics from the origin to (0, 0, 1/4) have length sqrt(πk)
    momenta = {k: [np.sqrt(np.pi * k), 0.0, 2.0 * np.pi * k] for k in (1, 2)}
    options = ShootingOptions(
        restarts=2, batch_size=1, min_converged=1, threads=1, initial_momenta=[momenta[k] for k in loops]
    )
    result = shoot(heisenberg, [0.0, 0.0, 0.0], [0.0, 0.0, 0.25], options)
    assert result.length == pytest.approx(np.sqrt(np.pi), abs=1e-6)
    assert result.restarts_used == 2


def test_warm_start_must_match_the_grid(heisenberg):
    with pytest.raises(ValueError):
        direct_solve(heisenberg, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], N=20, initial_controls=np.zeros((10, 2)))


def _unit_ball(rng, count):
    directions = rng.standard_normal((count, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return directions * rng.uniform(0.0, 1.0, (count, 1)) ** (1.0 / 3.0)


@pytest.mark.slow
def test_direct_method_agrees_with_shooting(heisenberg):
    rng = np.random.default_rng(2718)
    sources, targets = _unit_ball(rng, 5), _unit_ball(rng, 5)
    options = DirectOptions(mu0=1e4, rounds=1, max_iters=300)
    elapsed = 0.0
    for x0, x1 in zip(sources, targets):
        started = time.perf_counter()
        shot, result = distance(heisenberg, x0, x1)
        warm = sampled_controls(result.trajectory, 200)
        cost, controls = direct_solve(heisenberg, x0, x1, N=200, options=options, initial_controls=warm)
        elapsed += time.perf_counter() - started
        assert controls.shape == (200, 2)
        assert cost == pytest.approx(shot, rel=1e-2)
        assert first_variation_residual(heisenberg, result.trajectory) <= 1e-4
    assert elapsed < 120.0


def test_distance_is_symmetric_and_satisfies_the_triangle_inequality(heisenberg):
    options = ShootingOptions(restarts=16, batch_size=4, min_converged=2, threads=2)
    a, b, c = [0.0, 0.0, 0.0], [0.4, 0.1, 0.2], [-0.2, 0.3, -0.1]
    ab, _ = distance(heisenberg, a, b, options)
    ba, _ = distance(heisenberg, b, a, options)
    bc, _ = distance(heisenberg, b, c, options)
    ac, _ = distance(heisenberg, a, c, options)
    assert abs(ab - ba) <= 1e-5
    assert ac <= 1.02 * (ab + bc)


def test_lock_step_rows_converge_independently(heisenberg):
    problem = EndpointProblem(heisenberg, np.zeros(3), np.array([1.0, 0.0, 0.0]), 1.0, FlowOptions(method=IntegratorKind.RK4, dt=1e-2))
    guesses = np.array([[1.0, 0.0, 0.0], [0.8, 0.1, 0.3]])
    momenta, errors = levenberg_marquardt(problem, guesses, 1e-10, 100)
    assert np.all(errors <= 1e-10)
    # a row that starts converged is never moved
    np.testing.assert_array_equal(momenta[0], [1.0, 0.0, 0.0])
