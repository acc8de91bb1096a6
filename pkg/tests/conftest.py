import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

from qcap.model import Material


@pytest.fixture(scope="session")
def m01() -> Material:
    return Material(effective_mass_ratio=0.1)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)


def lattice_width(rng: np.random.Generator, lo: float, hi: float) -> float:
    """Widths on a 0.01 nm lattice keep oracle grids aligned with the jumps."""
    return float(rng.integers(round(lo * 100), round(hi * 100) + 1)) / 100.0
