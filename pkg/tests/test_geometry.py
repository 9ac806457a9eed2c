"""
Tests for frames, brackets, projections and the extended metric.
"""
import numpy as np
import pytest

from src.errors import NotGenerating, RegularityError
from src.geometry import (
    annihilator_basis,
    bracket_generating_step,
    extend_metric,
    extended_metric_tensor,
    horizontal_residual,
    lie_bracket,
    lift_covector,
    orthogonal_complement_frame,
    projection_derivative,
    projection_split,
)
from src.geometry.models import Chart
from src.systems import SystemSpec, build_system


@pytest.fixture(scope="module")
def plane_in_space():
    return build_system(SystemSpec(name="plane", dim=3, frame=[[1, 0, 0], [0, 1, 0]]))


def test_heisenberg_bracket(heisenberg):
    for x in ([0.0, 0.0, 0.0], [0.3, -1.2, 5.0]):
        np.testing.assert_allclose(lie_bracket(heisenberg, 0, 1, x), [0.0, 0.0, 1.0], atol=1e-14)


def test_constant_frame_commutes(euclidean3):
    np.testing.assert_allclose(lie_bracket(euclidean3, 0, 2, [1.0, 2.0, 3.0]), np.zeros(3))


def test_martinet_bracket_vanishes_on_the_plane(martinet):
    np.testing.assert_allclose(lie_bracket(martinet, 0, 1, [0.0, 0.5, 0.0]), np.zeros(3), atol=1e-14)
    np.testing.assert_allclose(lie_bracket(martinet, 0, 1, [0.7, 0.0, 0.0]), [0.0, 0.0, 0.7])


def test_bracket_generating_steps(heisenberg, martinet, euclidean3):
    assert bracket_generating_step(heisenberg, [0.2, 0.1, -0.4], 3) == 2
    assert bracket_generating_step(martinet, [0.0, 0.0, 0.0], 3) == 3
    assert bracket_generating_step(martinet, [1.0, 0.0, 0.0], 3) == 2
    assert bracket_generating_step(euclidean3, [0.0, 0.0, 0.0], 3) == 1


def test_not_generating(plane_in_space):
    with pytest.raises(NotGenerating) as info:
        bracket_generating_step(plane_in_space, [0.0, 0.0, 0.0], 3)
    assert info.value.rank == 2


def test_martinet_not_generating_at_depth_two(martinet):
    with pytest.raises(NotGenerating):
        bracket_generating_step(martinet, [0.0, 0.0, 0.0], 2)


def test_degenerate_frame_is_rejected():
    system = build_system(SystemSpec(name="collapsing", dim=2, frame=[["x1", 0]]))
    with pytest.raises(RegularityError):
        projection_split(system, [0.0, 1.0])


def test_projections_are_complementary(heisenberg):
    x = [0.4, -0.3, 1.0]
    split = projection_split(heisenberg, x)
    np.testing.assert_allclose(split.P @ split.P, split.P, atol=1e-12)
    np.testing.assert_allclose(split.P + split.Pperp, np.eye(3), atol=1e-12)
    X = heisenberg.frame.matrix(np.array(x))
    np.testing.assert_allclose(split.P @ X, X, atol=1e-12)
    # D⁰ projection kills the frame, (D^⊥)⁰ projection kills the complement
    alpha = np.array([0.3, -1.0, 2.0])
    np.testing.assert_allclose(X.T @ (split.Pstar @ alpha), np.zeros(2), atol=1e-12)
    for w in orthogonal_complement_frame(heisenberg, x):
        assert abs(w @ (split.Pstar_c @ alpha)) < 1e-12


def test_annihilator_and_lift(heisenberg):
    x = [0.4, -0.3, 1.0]
    X = heisenberg.frame.matrix(np.array(x))
    basis = annihilator_basis(heisenberg, x)
    assert basis.shape == (3, 1)
    np.testing.assert_allclose(X.T @ basis, np.zeros((2, 1)), atol=1e-12)
    p = lift_covector(heisenberg, x, [1.5, -0.5])
    np.testing.assert_allclose(X.T @ p, [1.5, -0.5], atol=1e-12)
    for w in orthogonal_complement_frame(heisenberg, x):
        assert abs(p @ w) < 1e-12


def test_projection_derivative_matches_differences(heisenberg):
    x = np.array([0.4, -0.3, 1.0])
    w = np.array([0.2, 0.5, -0.1])
    h = 1e-6
    fd = (projection_split(heisenberg, x + h * w).P - projection_split(heisenberg, x - h * w).P) / (2 * h)
    np.testing.assert_allclose(projection_derivative(heisenberg, x, w), fd, atol=1e-8)


def test_horizontal_residual(plane_in_space):
    assert horizontal_residual(plane_in_space, [0.0, 0.0, 0.0], [3.0, 1.0, 0.0]) == pytest.approx(0.0)
    assert horizontal_residual(plane_in_space, [0.0, 0.0, 0.0], [3.0, 0.0, 4.0]) == pytest.approx(4.0)


def test_extended_norm_is_pythagorean(plane_in_space):
    assert extend_metric(plane_in_space).norm([0.0, 0.0, 0.0], [3.0, 0.0, 4.0]) == pytest.approx(5.0)


def test_extended_metric_tensor_matches_norm(heisenberg, rng):
    x = rng.uniform(-1, 1, 3)
    ghat, dghat = extended_metric_tensor(heisenberg, x)
    extended = extend_metric(heisenberg)
    v = rng.standard_normal(3)
    assert v @ ghat @ v == pytest.approx(extended.squared_norm(list(x), list(v)), rel=1e-12)
    h = 1e-6
    for m in range(3):
        step = np.zeros(3)
        step[m] = h
        fd = (extended_metric_tensor(heisenberg, x + step)[0] - extended_metric_tensor(heisenberg, x - step)[0]) / (2 * h)
        np.testing.assert_allclose(dghat[:, :, m], fd, atol=1e-7)


def test_chart_wraps_angles():
    chart = Chart(coordinate_names=("phi", "x"), periodic=(True, False))
    np.testing.assert_allclose(chart.wrap([2 * np.pi + 0.5, 7.0]), [0.5, 7.0])
    np.testing.assert_allclose(chart.wrap([-np.pi - 0.1, 0.0]), [np.pi - 0.1, 0.0])
    rows = chart.wrap([[2 * np.pi + 0.5, 7.0], [-np.pi - 0.1, 0.0]])
    np.testing.assert_allclose(rows, [[0.5, 7.0], [np.pi - 0.1, 0.0]])


@pytest.mark.parametrize("name", ["heisenberg", "martinet", "unicycle"])
def test_bracket_is_antisymmetric(name, request, rng):
    system = request.getfixturevalue(name)
    for _ in range(5):
        x = rng.uniform(-1.0, 1.0, system.n)
        for i in range(system.k):
            for j in range(system.k):
                np.testing.assert_allclose(lie_bracket(system, i, j, x), -lie_bracket(system, j, i, x), atol=1e-12)


@pytest.mark.parametrize("x", [[0.3, 0.2, 0.1], [0.0, 0.2, 0.1]])
def test_deeper_search_never_raises_the_step(martinet, x):
    steps = []
    for depth in range(1, 6):
        try:
            steps.append(bracket_generating_step(martinet, x, max_depth=depth))
        except NotGenerating:
            steps.append(None)
    found = [s for s in steps if s is not None]
    assert found
    first = steps.index(found[0])
    assert all(s == found[0] for s in steps[first:])
    assert found[0] == (2 if x[0] != 0.0 else 3)
