import pytest

from p3tau import MonodromyData, cauchy_from_monodromy, integrate

REFERENCE = MonodromyData(0.3, 0.15)


@pytest.fixture(scope="session")
def reference_point():
    return REFERENCE


@pytest.fixture(scope="session")
def reference_trajectory():
    return integrate(cauchy_from_monodromy(REFERENCE), 1e-3, 200.0, 1e-12)
