"""
Tests for the sub-Hamiltonian flow, horizontal curves and the Barthel connection.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.dynamics import (
    ExtremalState,
    FlowOptions,
    IntegratorKind,
    Trajectory,
    anchor_E,
    barthel,
    barthel_transport,
    eta,
    flow,
    geodesic_invariance_check,
    hamiltonian_vector_field,
    horizontal_curve,
    spray,
)
from src.errors import ConfigError
from src.geometry import extend_metric
from src.systems import SystemSpec, build_system


@pytest.fixture(scope="module")
def warped_plane():
    """Riemannian ℝ² with g = diag(1, 1 + x1²) given as a full-rank quadratic metric."""
    return build_system(
        SystemSpec(name="warped", dim=2, frame=[[1, 0], [0, 1]], metric={"type": "quadratic", "Q": [[1, 0], [0, "1 + x1^2"]]})
    )


def _finite_difference_christoffel(x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    def g(y):
        return np.diag([1.0, 1.0 + y[0] ** 2])

    dg = np.zeros((2, 2, 2))
    for m in range(2):
        step = np.zeros(2)
        step[m] = h
        dg[:, :, m] = (g(x + step) - g(x - step)) / (2 * h)
    ginv = np.linalg.inv(g(x))
    gamma = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                gamma[i, j, k] = 0.5 * sum(
                    ginv[i, l] * (dg[l, k, j] + dg[l, j, k] - dg[j, k, l]) for l in range(2)
                )
    return gamma


def test_state_validation():
    with pytest.raises(ValidationError):
        ExtremalState(x=[0.0, 0.0], p=[1.0])
    with pytest.raises(ValidationError):
        ExtremalState(x=[np.nan], p=[1.0])


def test_trajectory_needs_increasing_times():
    with pytest.raises(ValidationError):
        Trajectory(
            times=[0.0, 0.0],
            xs=[[0.0], [1.0]],
            ps=[[0.0], [0.0]],
            controls=[[0.0], [0.0]],
            velocities=[[0.0], [0.0]],
            eta=[0.0, 0.0],
            speed=[0.0, 0.0],
            horizontality=[0.0, 0.0],
        )


def test_eta_and_anchor(heisenberg, euclidean3):
    assert eta(heisenberg, [0.0, 0.0, 0.0], [3.0, 4.0, 0.0]) == pytest.approx(12.5)
    # Covectors in D⁰ carry no energy for a quadratic metric
    assert eta(heisenberg, [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]) == pytest.approx(0.0)
    np.testing.assert_allclose(anchor_E(euclidean3, [1.0, 2.0, 3.0], [0.5, -1.0, 2.0]), [0.5, -1.0, 2.0])


def test_vector_field_matches_gradient_of_eta(heisenberg, rng):
    x, p = rng.standard_normal(3), rng.standard_normal(3)
    x_dot, p_dot = hamiltonian_vector_field(heisenberg, x, p)
    h = 1e-6
    for m in range(3):
        e = np.eye(3)[m] * h
        assert x_dot[m] == pytest.approx((eta(heisenberg, x, p + e) - eta(heisenberg, x, p - e)) / (2 * h), abs=1e-7)
        assert -p_dot[m] == pytest.approx((eta(heisenberg, x + e, p) - eta(heisenberg, x - e, p)) / (2 * h), abs=1e-7)


def test_euclidean_flow_is_straight(euclidean3):
    trajectory = flow(euclidean3, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 2.0, 3.0]), 2.0)
    np.testing.assert_allclose(trajectory.xs[-1], [2.0, 4.0, 6.0], atol=1e-12)
    assert trajectory.times[-1] == pytest.approx(2.0)


def test_heisenberg_straight_line(heisenberg):
    trajectory = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 1.0)
    np.testing.assert_allclose(trajectory.xs[-1], [1.0, 0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(trajectory.speed, 1.0)


def test_heisenberg_conservation_and_horizontality(heisenberg):
    options = FlowOptions(method=IntegratorKind.RK4, dt=1e-3)
    trajectory = flow(heisenberg, ExtremalState(x=[0.1, -0.2, 0.3], p=[0.6, 0.8, 1.5]), 10.0, options)
    assert trajectory.conserved
    assert trajectory.max_eta_drift <= 1e-8
    assert trajectory.horizontality.max() <= 1e-8


def test_adaptive_flow_samples(heisenberg):
    options = FlowOptions(method=IntegratorKind.RK45, rtol=1e-10, atol=1e-12, samples=51)
    trajectory = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.5]), 2.0, options)
    assert len(trajectory.times) == 51
    assert trajectory.max_eta_drift <= 1e-8


@pytest.mark.parametrize("fixture", ["unicycle", "unicycle_weighted"])
def test_unicycle_does_not_slide(fixture, request):
    system = request.getfixturevalue(fixture)
    options = FlowOptions(dt=1e-2)
    trajectory = flow(system, ExtremalState(x=[0.2, 0.0, 0.0, 0.0], p=[0.3, 1.0, 0.2, 0.1]), 5.0, options)
    phi = trajectory.xs[:, 0]
    slip = np.sin(phi) * trajectory.velocities[:, 1] - np.cos(phi) * trajectory.velocities[:, 2]
    assert np.abs(slip).max() <= 1e-8


def test_nonpositive_duration_is_rejected(heisenberg):
    with pytest.raises(ConfigError):
        flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 0.0)


def test_horizontal_curve_with_constant_controls(martinet):
    curve = horizontal_curve(martinet, [0.0, 0.0, 0.0], lambda _t: [0.0, 1.0], 1.0, FlowOptions(dt=1e-2))
    np.testing.assert_allclose(curve.xs[-1], [0.0, 1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(curve.speed, 1.0)
    assert curve.horizontality.max() < 1e-12


def test_flat_space_has_no_spray(euclidean3):
    data = barthel(euclidean3, [1.0, 2.0, 3.0], [0.3, -0.1, 2.0])
    np.testing.assert_allclose(data.G, np.zeros(3), atol=1e-14)
    np.testing.assert_allclose(data.N, np.zeros((3, 3)), atol=1e-14)


def test_barthel_matches_christoffel_oracle(warped_plane, rng):
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-1.0, 1.0, 2)
        v = rng.standard_normal(2)
        data = barthel(warped_plane, x, v)
        gamma = _finite_difference_christoffel(x)
        worst = max(worst, np.linalg.norm(data.N @ v - np.einsum("ijk,j,k->i", gamma, v, v)))
    assert worst <= 1e-6


def test_generic_spray_agrees_with_riemannian_path(heisenberg, rng):
    x, v = rng.uniform(-1.0, 1.0, 3), rng.standard_normal(3)
    fast = barthel(heisenberg, x, v)
    generic = barthel(heisenberg, x, v, extended=extend_metric(heisenberg))
    np.testing.assert_allclose(generic.G, fast.G, atol=1e-10)
    np.testing.assert_allclose(generic.N, fast.N, atol=1e-10)
    np.testing.assert_allclose(spray(heisenberg, x, v), fast.G, atol=1e-12)


def test_spray_is_twice_the_connection_on_v(unicycle_weighted):
    data = barthel(unicycle_weighted, [0.3, 0.1, -0.2, 0.5], [0.4, 1.0, 0.2, 0.7])
    # G is 2-homogeneous in v, so N v = ½ ∂G/∂v · v = G
    np.testing.assert_allclose(data.N @ np.array([0.4, 1.0, 0.2, 0.7]), data.G, atol=1e-9)


@pytest.mark.parametrize("scale", [2.5, -1.5])
def test_non_quadratic_spray_is_homogeneous_of_degree_two(unicycle_weighted, scale):
    x = np.array([0.3, 0.1, -0.2, 0.5])
    v = np.array([0.4, 1.0, 0.2, 0.7])
    G = spray(unicycle_weighted, x, v)
    assert np.linalg.norm(G) > 1e-6
    np.testing.assert_allclose(spray(unicycle_weighted, x, scale * v), scale**2 * G, atol=1e-9)


def test_heisenberg_distribution_is_geodesically_invariant(heisenberg):
    x0 = np.array([0.2, -0.1, 0.0])
    v0 = heisenberg.frame.matrix(x0) @ np.array([0.6, 0.8])
    assert geodesic_invariance_check(heisenberg, x0, v0, T=5.0, dt=1e-2) <= 1e-6


def test_transport_in_flat_space_is_constant(euclidean3):
    trajectory = flow(euclidean3, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.5, 0.0]), 1.0, FlowOptions(dt=0.05))
    alphas = barthel_transport(euclidean3, trajectory, [1.0, -2.0, 0.5])
    np.testing.assert_allclose(alphas, np.tile([1.0, -2.0, 0.5], (len(alphas), 1)), atol=1e-14)
