"""
Tests for the horizontal gradient, divergence, sub-Laplacian and flatness scans.
"""
import numpy as np
import pytest

from src.errors import ConfigError, InvalidRegion
from src.expr import parse
from src.laplacian import (
    SamplingBox,
    ScalarField,
    VolumeForm,
    default_test_fields,
    flatness_scan,
    horizontal_divergence,
    horizontal_gradient,
    sub_laplacian,
)
from src.systems import SystemSpec, build_system

WARP = "1 + x1^2"


@pytest.fixture(scope="module")
def warped_plane():
    """Full-rank plane whose taming metric equals the sub-Finsler metric."""
    return build_system(
        SystemSpec(
            name="warped",
            dim=2,
            frame=[[1, 0], [0, 1]],
            taming=[[1, 0], [0, WARP]],
            metric={"type": "quadratic", "Q": [[1, 0], [0, WARP]]},
        )
    )


def _field(system, source):
    return ScalarField.parse(source, system.coordinate_names)


def _laplace_beltrami(h, x, step=1e-3):
    """Central-difference (1/√G) ∂_j(√G g^{jk} ∂_k h) for g = diag(1, 1 + x1²)."""

    def flux(y):
        root = np.sqrt(1.0 + y[0] ** 2)
        grad = np.array(
            [
                (h(y + [step, 0.0]) - h(y - [step, 0.0])) / (2 * step),
                (h(y + [0.0, step]) - h(y - [0.0, step])) / (2 * step),
            ]
        )
        return root * np.array([grad[0], grad[1] / (1.0 + y[0] ** 2)])

    x = np.asarray(x, dtype=float)
    total = (flux(x + [step, 0.0])[0] - flux(x - [step, 0.0])[0]) / (2 * step)
    total += (flux(x + [0.0, step])[1] - flux(x - [0.0, step])[1]) / (2 * step)
    return total / np.sqrt(1.0 + x[0] ** 2)


def test_euclidean_calibration(euclidean3, rng):
    half_norm = _field(euclidean3, "(x1^2 + x2^2 + x3^2)/2")
    for x in rng.uniform(-2.0, 2.0, (5, 3)):
        assert sub_laplacian(euclidean3, half_norm, x) == pytest.approx(3.0, abs=1e-8)
        for source in ("x1", "2*x2 - x3 + 4"):
            assert sub_laplacian(euclidean3, _field(euclidean3, source), x) == pytest.approx(0.0, abs=1e-10)


def test_heisenberg_square_norm_at_origin(heisenberg):
    assert sub_laplacian(heisenberg, _field(heisenberg, "x^2 + y^2"), [0.0, 0.0, 0.0]) == pytest.approx(4.0, abs=1e-10)


def test_heisenberg_reaches_vertical_second_derivatives(heisenberg):
    # X1² z² + X2² z² = (x² + y²)/2 at z = 0
    value = sub_laplacian(heisenberg, _field(heisenberg, "z^2"), [1.0, 1.0, 0.0])
    assert value == pytest.approx(1.0, abs=1e-10)


def test_horizontal_gradient(heisenberg, euclidean3):
    np.testing.assert_allclose(horizontal_gradient(euclidean3, _field(euclidean3, "x1"), [1.0, 2.0, 3.0]), [1.0, 0.0, 0.0])
    # dz seen through the frame at (x, y): p̂ = (−y/2, x/2)
    gradient = horizontal_gradient(heisenberg, _field(heisenberg, "z"), [2.0, 0.0, 0.0])
    np.testing.assert_allclose(gradient, [0.0, 1.0, 1.0], atol=1e-14)


def test_horizontal_divergence(euclidean3):
    names = euclidean3.coordinate_names
    coefficients = [parse("x1", names), parse("0", names), parse("x2*x3", names)]
    assert horizontal_divergence(euclidean3, coefficients, [0.5, 2.0, 1.0]) == pytest.approx(1.0 + 2.0)
    with pytest.raises(ValueError):
        horizontal_divergence(euclidean3, coefficients[:2], [0.0, 0.0, 0.0])


def test_taming_volume_matches_laplace_beltrami(warped_plane):
    for source, fn in (
        ("x1", lambda y: y[0]),
        ("x1^2 + sin(x2)", lambda y: y[0] ** 2 + np.sin(y[1])),
        ("x1*x2", lambda y: y[0] * y[1]),
    ):
        for x in ([0.5, 0.3], [-0.7, 1.2]):
            value = sub_laplacian(warped_plane, _field(warped_plane, source), x, VolumeForm.TAMING)
            assert value == pytest.approx(_laplace_beltrami(fn, x), abs=1e-5)
    assert sub_laplacian(warped_plane, _field(warped_plane, "x1"), [0.5, 0.0], VolumeForm.TAMING) == pytest.approx(0.4)


def test_default_test_fields(heisenberg):
    names = [f.name for f in default_test_fields(heisenberg)]
    assert names == ["x", "y", "z", "x^2", "y^2", "z^2", "x*y", "x*z", "y*z"]


def test_euclidean_linear_fields_are_flat(euclidean3):
    fields = [_field(euclidean3, s) for s in ("x1", "x2", "x3", "x1 - 3*x2")]
    report = flatness_scan(euclidean3, fields, samples=50, threads=2)
    assert report.flat
    assert report.max_abs <= 1e-10
    assert report.values.shape == (4, 50)
    assert report.skipped == 0


def test_heisenberg_is_not_flat(heisenberg):
    fields = [_field(heisenberg, s) for s in ("x^2", "y^2", "x*y", "z^2")]
    report = flatness_scan(heisenberg, fields, samples=50, seed=3)
    assert not report.flat
    assert report.max_abs >= 0.1
    table = report.to_table()
    assert table["fields"] == ["x^2", "y^2", "x*y", "z^2"]
    assert len(table["values"][0]) == 50


def test_scan_rejects_empty_regions(heisenberg):
    with pytest.raises(InvalidRegion):
        flatness_scan(heisenberg, samples=0)
    with pytest.raises(InvalidRegion):
        flatness_scan(heisenberg, region=SamplingBox(lower=[0, 0, 1], upper=[1, 1, 0]), samples=10)
    with pytest.raises(InvalidRegion):
        flatness_scan(heisenberg, test_fields=[], samples=10)
    with pytest.raises(ConfigError):
        flatness_scan(heisenberg, region=SamplingBox.centered(2, 1.0), samples=10)


def test_scan_skips_points_outside_the_domain(unicycle_weighted):
    # dx1 vanishes on D only where cos(phi) = 0
    report = flatness_scan(unicycle_weighted, [_field(unicycle_weighted, "x1")], samples=20, seed=1)
    assert report.skipped == 0
    assert np.all(np.isfinite(report.values))


def test_scan_is_reproducible(heisenberg):
    fields = [_field(heisenberg, "x*z")]
    first = flatness_scan(heisenberg, fields, samples=20, seed=5, threads=1)
    second = flatness_scan(heisenberg, fields, samples=20, seed=5, threads=4)
    np.testing.assert_array_equal(first.values, second.values)


def test_sub_laplacian_is_linear(heisenberg, rng):
    names = heisenberg.coordinate_names
    first, second = "x^2 + y*z", "sin(x)*exp(y) + z^2"
    h1, h2 = ScalarField.parse(first, names), ScalarField.parse(second, names)
    combined = ScalarField.parse(f"1.5*({first}) - 0.5*({second})", names)
    for _ in range(10):
        x = rng.uniform(-1.0, 1.0, 3)
        expected = 1.5 * sub_laplacian(heisenberg, h1, x) - 0.5 * sub_laplacian(heisenberg, h2, x)
        assert sub_laplacian(heisenberg, combined, x) == pytest.approx(expected, abs=1e-9)
