"""
Tests for the nonholonomic tensors, abnormal certificates and the Vakonomic comparison.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.dynamics import ExtremalState, FlowOptions, barthel_transport, flow, horizontal_curve
from src.expr import parse
from src.nonholonomic import (
    CovectorFieldAlongCurve,
    Subbundle,
    abnormal_check,
    barthel_covariant_derivative,
    covariant_derivative_samples,
    grid_derivative,
    nabla_H,
    nabla_bar,
    nonholonomic_bracket,
    normal_connection_check,
    subbundle_residual,
    tensor_T,
    tensor_TB,
    transport_T,
    vakonomic_comparison,
)
from src.geometry import annihilator_basis
from src.solve import ShootingOptions, shoot
from src.systems import SystemSpec, build_system

OPTIONS = FlowOptions(dt=1e-2)


@pytest.fixture(scope="module")
def martinet_line(martinet):
    return horizontal_curve(martinet, [0.0, 0.0, 0.0], lambda _t: [0.0, 1.0], 1.0, OPTIONS)


def test_grid_derivative_is_fourth_order():
    times = np.linspace(0.0, 1.0, 101)
    values = np.column_stack([np.sin(times), times ** 3])
    expected = np.column_stack([np.cos(times), 3 * times ** 2])
    np.testing.assert_allclose(grid_derivative(times, values), expected, atol=1e-7)


def test_martinet_line_is_abnormal(martinet, martinet_line):
    certificate = abnormal_check(martinet, martinet_line)
    assert certificate is not None
    assert certificate.residual <= 1e-8
    assert certificate.annihilation <= 1e-8
    # γ stays proportional to dz along x = 0
    np.testing.assert_allclose(certificate.samples[:, :2], 0.0, atol=1e-8)
    np.testing.assert_allclose(np.abs(certificate.samples[:, 2]), 1.0, atol=1e-8)


def test_heisenberg_geodesic_is_not_abnormal(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.0]), 1.0, OPTIONS)
    assert abnormal_check(heisenberg, geodesic) is None


def test_shot_heisenberg_geodesic_is_not_abnormal(heisenberg):
    options = ShootingOptions(restarts=8, batch_size=4, min_converged=1, threads=2)
    result = shoot(heisenberg, [0.0, 0.0, 0.0], [0.3, 0.2, 0.1], options)
    assert abnormal_check(heisenberg, result.trajectory, tol=1e-6) is None


def test_full_rank_has_no_abnormal(euclidean3):
    line = flow(euclidean3, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 1.0, OPTIONS)
    assert abnormal_check(euclidean3, line) is None


def test_transport_stays_in_annihilator(martinet, martinet_line):
    section = transport_T(martinet, martinet_line, [0.0, 0.0, 2.0])
    assert section.annihilation <= 1e-8
    assert section.samples.shape == martinet_line.xs.shape


def test_transport_rejects_horizontal_covector(martinet, martinet_line):
    with pytest.raises(ValueError):
        transport_T(martinet, martinet_line, [1.0, 0.0, 0.0])


def test_torsion_on_heisenberg(heisenberg):
    value = tensor_T(heisenberg, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    assert value.target == Subbundle.COMPLEMENT_ANNIHILATOR
    np.testing.assert_allclose(value.value, [0.0, -1.0, 0.0], atol=1e-12)
    assert subbundle_residual(heisenberg, value) <= 1e-12


def test_torsion_values_lie_in_their_subbundle(heisenberg, rng):
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, 3)
        v = heisenberg.frame.matrix(x) @ rng.standard_normal(2)
        gamma = rng.standard_normal(3)
        assert subbundle_residual(heisenberg, tensor_TB(heisenberg, x, v, gamma)) <= 1e-10


def test_flat_space_has_no_barthel_torsion(euclidean3):
    value = tensor_TB(euclidean3, [1.0, 2.0, 3.0], [0.5, 0.5, 0.5], [1.0, -1.0, 2.0])
    assert value.target == Subbundle.ANNIHILATOR
    assert value.norm == pytest.approx(0.0, abs=1e-14)


def test_nonholonomic_bracket(heisenberg):
    names = heisenberg.coordinate_names
    coefficients = [parse("0", names), parse("1", names)]
    alpha = [parse("1", names), parse("0", names), parse("0", names)]
    result = nonholonomic_bracket(heisenberg, [0.0, 0.0, 0.0], coefficients, alpha)
    np.testing.assert_allclose(result.value, [0.0, 0.0, -0.5], atol=1e-14)
    np.testing.assert_allclose(result.annihilator_part, [0.0, 0.0, -0.5], atol=1e-14)
    np.testing.assert_allclose(result.complement_part, 0.0, atol=1e-14)


def test_nonholonomic_bracket_checks_arity(heisenberg):
    names = heisenberg.coordinate_names
    with pytest.raises(ValueError):
        nonholonomic_bracket(heisenberg, [0.0, 0.0, 0.0], [parse("1", names)], [parse("0", names)] * 3)


def test_vakonomic_in_flat_space_is_zero(euclidean3):
    line = flow(euclidean3, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 1.0, 0.0]), 1.0, OPTIONS)
    section = vakonomic_comparison(euclidean3, line)
    assert section is not None
    np.testing.assert_allclose(section.samples, 0.0, atol=1e-14)
    assert section.kernel_dimension == 0


def test_vakonomic_on_the_martinet_line_leaves_the_abnormal_direction_free(martinet, martinet_line):
    section = vakonomic_comparison(martinet, martinet_line)
    certificate = abnormal_check(martinet, martinet_line)
    assert section is not None
    assert section.kernel_dimension == 1
    start = section.kernel[0, 0]
    cosine = start @ certificate.samples[0] / (np.linalg.norm(start) * np.linalg.norm(certificate.samples[0]))
    assert abs(cosine) == pytest.approx(1.0, abs=1e-8)


def test_vakonomic_on_a_straight_heisenberg_geodesic_is_unique(heisenberg):
    axis = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 1.0, OPTIONS)
    section = vakonomic_comparison(heisenberg, axis)
    assert section is not None
    assert section.kernel_dimension == 0
    assert section.ode_residual <= 1e-8
    np.testing.assert_allclose(section.samples, 0.0, atol=1e-10)


def test_normal_connection_report(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.0]), 1.0, OPTIONS)
    report = normal_connection_check(heisenberg, geodesic)
    assert report.samples == len(geodesic.times)
    assert np.isfinite(report.horizontal_residual)
    assert np.isfinite(report.annihilator_residual)


def test_constant_covector_is_parallel_in_flat_space(euclidean3):
    line = flow(euclidean3, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 2.0, 0.0]), 1.0, OPTIONS)
    alpha = CovectorFieldAlongCurve(trajectory=line, samples=np.tile([1.0, -1.0, 0.5], (len(line.times), 1)))
    np.testing.assert_allclose(barthel_covariant_derivative(euclidean3, line, alpha, 0.5), 0.0, atol=1e-12)
    np.testing.assert_allclose(nabla_bar(euclidean3, line, alpha, 0.5), 0.0, atol=1e-12)


def test_barthel_transport_is_parallel(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.0]), 1.0, OPTIONS)
    samples = barthel_transport(heisenberg, geodesic, [0.3, -0.2, 1.0])
    alpha = CovectorFieldAlongCurve(trajectory=geodesic, samples=samples)
    assert np.abs(covariant_derivative_samples(heisenberg, alpha)).max() <= 1e-6


def test_nabla_H_lands_in_annihilator(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.0]), 1.0, OPTIONS)
    samples = np.column_stack([np.sin(geodesic.times), np.ones_like(geodesic.times), geodesic.times ** 2])
    alpha = CovectorFieldAlongCurve(trajectory=geodesic, samples=samples)
    value = nabla_H(heisenberg, geodesic, alpha, 0.4)
    X = heisenberg.frame.matrix(geodesic.xs[40])
    np.testing.assert_allclose(X.T @ value, 0.0, atol=1e-12)


def test_covector_field_must_match_the_grid(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[1.0, 0.0, 0.0]), 1.0, OPTIONS)
    with pytest.raises(ValidationError):
        CovectorFieldAlongCurve(trajectory=geodesic, samples=np.zeros((3, 3)))


@pytest.mark.parametrize("name", ["heisenberg", "martinet"])
def test_torsions_are_bilinear(name, request, rng):
    system = request.getfixturevalue(name)
    a, b = 1.3, -0.7
    for _ in range(5):
        x = rng.uniform(-1.0, 1.0, 3)
        X = system.frame.matrix(x)
        v, w = X @ rng.standard_normal(2), X @ rng.standard_normal(2)
        basis = annihilator_basis(system, x)
        gamma, delta = basis @ rng.standard_normal(basis.shape[1]), basis @ rng.standard_normal(basis.shape[1])
        alpha, beta = rng.standard_normal(3), rng.standard_normal(3)
        for tensor, first, second in ((tensor_T, gamma, delta), (tensor_TB, alpha, beta)):

            def value(v_, c_):
                return tensor(system, x, v_, c_).value

            np.testing.assert_allclose(
                value(a * v + b * w, first), a * value(v, first) + b * value(w, first), atol=1e-10
            )
            np.testing.assert_allclose(
                value(v, a * first + b * second), a * value(v, first) + b * value(v, second), atol=1e-10
            )


def test_torsion_vanishes_on_an_integrable_distribution(rng):
    # X1 = ∂x + y∂z and X2 = ∂y + x∂z commute: D = ker d(z − xy)
    leaves = build_system(SystemSpec(name="leaves", dim=3, coordinates=["x", "y", "z"], frame=[[1, 0, "y"], [0, 1, "x"]]))
    for _ in range(10):
        x = rng.uniform(-1.0, 1.0, 3)
        v = leaves.frame.matrix(x) @ rng.standard_normal(2)
        gamma = annihilator_basis(leaves, x)[:, 0]
        assert tensor_T(leaves, x, v, gamma).norm <= 1e-8


def test_nabla_bar_obeys_the_leibniz_rule(heisenberg):
    geodesic = flow(heisenberg, ExtremalState(x=[0.0, 0.0, 0.0], p=[0.6, 0.8, 1.0]), 1.0, OPTIONS)
    t = geodesic.times
    samples = np.column_stack([np.sin(t), np.cos(t), t])
    scale = 1.0 + t**2
    alpha = CovectorFieldAlongCurve(trajectory=geodesic, samples=samples)
    scaled = CovectorFieldAlongCurve(trajectory=geodesic, samples=scale[:, None] * samples)
    i = 50
    expected = 2.0 * t[i] * samples[i] + scale[i] * nabla_bar(heisenberg, geodesic, alpha, t[i])
    np.testing.assert_allclose(nabla_bar(heisenberg, geodesic, scaled, t[i]), expected, atol=1e-6)


def test_transport_is_linear(unicycle):
    curve = horizontal_curve(unicycle, [0.1, 0.0, 0.0, 0.2], lambda t: [1.0, 0.5 * np.cos(t)], 1.0, OPTIONS)
    basis = annihilator_basis(unicycle, curve.xs[0])
    assert basis.shape[1] == 2
    first = transport_T(unicycle, curve, basis[:, 0]).samples
    second = transport_T(unicycle, curve, basis[:, 1]).samples
    combined = transport_T(unicycle, curve, 2.0 * basis[:, 0] - 0.5 * basis[:, 1]).samples
    np.testing.assert_allclose(combined, 2.0 * first - 0.5 * second, atol=1e-10)
