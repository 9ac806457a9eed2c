"""
Tests for metric families, the Legendre transform and axiom validation.
"""
import numpy as np
import pytest

from src.errors import ConfigError, DomainError
from src.metric import (
    CurvatureWeightedMetric,
    MetricSpec,
    dual_metric,
    dual_metric_sup,
    legendre,
    legendre_inverse,
    validate,
)
from src.systems import SystemSpec, build_system

HEISENBERG_FRAME = [[1, 0, "-y/2"], [0, 1, "x/2"]]


def _heisenberg_with(metric: MetricSpec):
    return build_system(
        SystemSpec(name="variant", dim=3, coordinates=["x", "y", "z"], frame=HEISENBERG_FRAME, metric=metric)
    )


@pytest.fixture(scope="module")
def quartic():
    return _heisenberg_with(MetricSpec(type="custom", F2="sqrt((u1^2 + u2^2)^2 + u2^4)"))


@pytest.fixture(scope="module")
def varying():
    return _heisenberg_with(MetricSpec(type="quadratic", Q=[["1 + x^2", 0], [0, "2 + sin(y)"]]))


def test_euclidean_legendre_is_identity(euclidean3):
    metric = euclidean3.metric
    x = [0.0, 0.0, 0.0]
    np.testing.assert_allclose(legendre(metric, x, [3.0, 4.0, 0.0]), [3.0, 4.0, 0.0])
    np.testing.assert_allclose(legendre_inverse(metric, x, [3.0, 4.0, 0.0]), [3.0, 4.0, 0.0])
    assert dual_metric(metric, x, [3.0, 4.0, 0.0]) == pytest.approx(5.0)


def test_quadratic_norm_uses_Q(varying):
    x = [1.0, 0.0, 0.0]
    assert varying.metric.norm(x, [1.0, 0.0]) == pytest.approx(np.sqrt(2.0))
    assert varying.metric.norm(x, [0.0, 1.0]) == pytest.approx(np.sqrt(2.0))


def test_curvature_weighted_is_homogeneous():
    metric = CurvatureWeightedMetric(3.0)
    x = [0.0, 0.0, 0.0]
    u = [0.7, -0.4]
    assert metric.norm(x, [2 * v for v in u]) == pytest.approx(2 * metric.norm(x, u))
    assert metric.norm(x, [-v for v in u]) == pytest.approx(metric.norm(x, u))
    # Straight motion costs what the Euclidean norm does, turning in place costs α^¼
    assert metric.norm(x, [1.0, 0.0]) == pytest.approx(1.0)
    assert metric.norm(x, [0.0, 1.0]) == pytest.approx(3.0 ** 0.25)


def test_curvature_weighted_derivatives_match_ad():
    metric = CurvatureWeightedMetric(3.0)
    x = [0.0, 0.0, 0.0]
    u = [0.8, -0.3]
    h = 1e-6
    grad = metric.grad_u(x, u)
    for a in range(2):
        step = np.zeros(2)
        step[a] = h
        fd = (metric.lagrangian(x, list(u + step)) - metric.lagrangian(x, list(u - step))) / (2 * h)
        assert grad[a] == pytest.approx(fd, abs=1e-8)
    fd_hessian = np.array(
        [(metric.grad_u(x, list(np.add(u, e * h))) - metric.grad_u(x, list(np.subtract(u, e * h)))) / (2 * h)
         for e in np.eye(2)]
    )
    np.testing.assert_allclose(metric.hess_u(x, u), fd_hessian, atol=1e-7)


def test_legendre_round_trip_curvature_weighted():
    metric = CurvatureWeightedMetric(3.0)
    x = [0.0, 0.0, 0.0]
    u = np.array([1.0, 0.5])
    p = legendre(metric, x, u)
    np.testing.assert_allclose(legendre_inverse(metric, x, p), u, atol=1e-10)
    assert dual_metric(metric, x, p) == pytest.approx(metric.norm(x, u), rel=1e-10)


def test_sup_formula_agrees_with_legendre_route():
    metric = CurvatureWeightedMetric(3.0)
    x = [0.0, 0.0, 0.0]
    p = np.array([0.6, -1.1])
    assert dual_metric_sup(metric, x, p) == pytest.approx(dual_metric(metric, x, p), rel=1e-6)


def test_zero_covector_has_no_preimage_for_non_quadratic_metrics():
    with pytest.raises(DomainError):
        legendre_inverse(CurvatureWeightedMetric(3.0), [0.0, 0.0, 0.0], [0.0, 0.0])


def test_curvature_weight_below_one_is_rejected():
    with pytest.raises(ConfigError):
        _heisenberg_with(MetricSpec(type="curvature_weighted", alpha=0.5))


def test_custom_metric_needs_one_expression():
    with pytest.raises(ValueError):
        MetricSpec(type="custom")


def test_custom_norm_expression(heisenberg):
    system = _heisenberg_with(MetricSpec(type="custom", F="sqrt(u1^2 + u2^2)"))
    x = [0.1, 0.2, 0.3]
    assert system.metric.norm(x, [3.0, 4.0]) == pytest.approx(5.0)
    np.testing.assert_allclose(system.metric.grad_u(x, [3.0, 4.0]), [3.0, 4.0])


@pytest.mark.parametrize("name", ["heisenberg", "weighted", "quartic", "varying"])
def test_validation_passes_for_shipped_metrics(name, heisenberg, unicycle_weighted, quartic, varying):
    system = {"heisenberg": heisenberg, "weighted": unicycle_weighted, "quartic": quartic, "varying": varying}[name]
    report = validate(system.metric, system, samples=10_000, seed=1, duality_samples=1000)
    assert report.passed, report.checks
    assert report.duality_samples == 1000
    assert report.max_homogeneity_violation <= 1e-9
    assert report.min_hessian_eigenvalue > 0
    assert report.max_duality_error <= 1e-8


def test_validation_flags_a_non_convex_norm():
    system = _heisenberg_with(MetricSpec(type="custom", F2="sqrt(u1^4 + u2^4 - 1.9*u1^2*u2^2)"))
    report = validate(system.metric, system, samples=500, seed=3)
    hessian = next(c for c in report.checks if c.name == "hessian_positivity")
    assert not hessian.passed


@pytest.mark.parametrize("name", ["heisenberg", "weighted", "quartic", "varying"])
def test_euler_identity(name, heisenberg, unicycle_weighted, quartic, varying, rng):
    system = {"heisenberg": heisenberg, "weighted": unicycle_weighted, "quartic": quartic, "varying": varying}[name]
    metric = system.metric
    for _ in range(50):
        x = rng.uniform(-1.0, 1.0, system.n)
        u = rng.standard_normal(system.k)
        lagrangian = float(metric.lagrangian(list(x), list(u)))
        assert float(u @ metric.grad_u(x, u)) == pytest.approx(2.0 * lagrangian, abs=1e-10 * max(1.0, lagrangian))


@pytest.mark.parametrize("name", ["heisenberg", "weighted", "quartic"])
@pytest.mark.parametrize("scale", [0.3, 2.0, -1.7])
def test_dual_metric_is_absolutely_homogeneous(name, scale, heisenberg, unicycle_weighted, quartic, rng):
    system = {"heisenberg": heisenberg, "weighted": unicycle_weighted, "quartic": quartic}[name]
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, system.n)
        p_hat = rng.standard_normal(system.k)
        value = dual_metric(system.metric, x, p_hat)
        scaled = dual_metric(system.metric, x, scale * p_hat)
        assert abs(scaled - abs(scale) * value) <= 1e-9 * value
