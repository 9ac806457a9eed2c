"""
Shared fixtures: catalog systems and an isolated run ledger.
"""
import numpy as np
import pytest

from src.config import settings
from src.systems import make_system


@pytest.fixture(scope="session")
def heisenberg():
    return make_system("heisenberg")


@pytest.fixture(scope="session")
def martinet():
    return make_system("martinet")


@pytest.fixture(scope="session")
def euclidean3():
    return make_system("euclidean", dim=3)


@pytest.fixture(scope="session")
def unicycle():
    return make_system("unicycle")


@pytest.fixture(scope="session")
def unicycle_weighted():
    return make_system("unicycle", metric="curvature_weighted", alpha=3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ledger(tmp_path, monkeypatch):
    """Point the run ledger at a throwaway sqlite file."""
    url = f"sqlite+aiosqlite:///{tmp_path / 'runs.db'}"
    monkeypatch.setattr(settings, "database_url", url)
    return url
