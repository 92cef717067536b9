"""
Pytest configuration and fixtures for pyhardy tests.
"""

import pytest

from pyhardy import registry
from pyhardy.weights import WeightTriple


@pytest.fixture(autouse=True)
def clear_registry():
    """Clear the catalog cache before each test to avoid cross-test pollution."""
    registry.clear()
    yield
    registry.clear()


@pytest.fixture
def classical_triple():
    """M = λ², φ = −4 ln r, ω = 1/r: verdict B1, b1 = 3/4, L = 1/4, C = 4/9."""
    return WeightTriple.build("power:p=2", "-4*ln(r)", "1/r", name="classical p=2 alpha=4")


@pytest.fixture
def classical_below_triple():
    """M = λ², φ = 2 ln r, ω = 1/r (α = −2): verdict B1, b1 = 3/2, L = 1/2, C = 4/9."""
    return WeightTriple.build("power:p=2", "2*ln(r)", "1/r", name="classical p=2 alpha=-2")


@pytest.fixture
def b2_triple():
    """M = λ², φ = −ln(r)/2, ω = 1/r (α = 0.5): verdict B2, b2 = 1, L = 2, C = 16."""
    return WeightTriple.build("power:p=2", "-0.5*ln(r)", "1/r", name="classical p=2 alpha=0.5")


@pytest.fixture
def gaussian_triple():
    """M = λ², φ = −r²/2, ω = r: verdict B1, b1 = 1, L = 1, C = 4."""
    return WeightTriple.build("power:p=2", "-r^2/2", "r", name="gaussian p=2")
