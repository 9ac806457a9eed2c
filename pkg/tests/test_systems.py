"""
Tests for the built-in catalog and inline system construction.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import ConfigError, UnknownSystem
from src.systems import CATALOG, SystemSpec, build_system, catalog_entries, make_system


def test_heisenberg_shape(heisenberg):
    assert (heisenberg.n, heisenberg.k) == (3, 2)
    np.testing.assert_allclose(
        heisenberg.frame.matrix(np.array([2.0, 4.0, 0.0])), [[1.0, 0.0], [0.0, 1.0], [-2.0, 1.0]]
    )


def test_unicycle_frame(unicycle):
    assert (unicycle.n, unicycle.k) == (4, 2)
    assert unicycle.chart.periodic == (True, False, False, True)
    X = unicycle.frame.matrix(np.array([np.pi / 2, 0.0, 0.0, 0.0]))
    np.testing.assert_allclose(X[:, 0], [0.0, 0.0, 1.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(X[:, 1], [1.0, 0.0, 0.0, 0.0])


def test_reduced_unicycle_drops_the_wheel_angle():
    system = make_system("unicycle_reduced")
    assert system.coordinate_names == ("phi", "x1", "x2")
    assert system.k == 2


def test_euclidean_dimension():
    system = make_system("euclidean", dim=5)
    assert (system.n, system.k) == (5, 5)


def test_unknown_system():
    with pytest.raises(UnknownSystem) as info:
        make_system("noSuch")
    assert info.value.exit_code == 2


def test_metric_options_are_enforced():
    with pytest.raises(ConfigError):
        make_system("martinet", metric="curvature_weighted")
    assert make_system("unicycle", metric="curvature_weighted").metric.describe() == "curvature_weighted(alpha=3)"


def test_catalog_listing():
    entries = {e["name"]: e for e in catalog_entries()}
    assert set(entries) == set(CATALOG)
    assert entries["unicycle"]["metrics"] == ["quadratic", "curvature_weighted"]
    assert (entries["martinet"]["n"], entries["martinet"]["k"]) == (3, 2)


def test_inline_system_with_taming_metric():
    spec = SystemSpec(
        name="warped",
        dim=2,
        frame=[[1, 0], [0, 1]],
        taming=[[1, 0], [0, "1 + x1^2"]],
        metric={"type": "quadratic", "Q": [[1, 0], [0, "1 + x1^2"]]},
    )
    system = build_system(spec)
    np.testing.assert_allclose(system.taming.matrix(np.array([2.0, 0.0])), [[1.0, 0.0], [0.0, 5.0]])


def test_inline_shape_errors():
    with pytest.raises(ValidationError):
        SystemSpec(dim=3, frame=[[1, 0]])
    with pytest.raises(ValidationError):
        SystemSpec(dim=2, frame=[[1, 0]], coordinates=["a"])
