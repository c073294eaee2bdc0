import numpy as np
import pytest

import chaoscast as cc


@pytest.fixture(scope="session")
def lorenz_series():
    """Moderate Lorenz run shared by module tests (dt=0.01)."""
    return cc.generate(cc.system_spec("lorenz", transient=1000), 4000)


@pytest.fixture(scope="session")
def henon_100k():
    """Large Henon sample for box-dimension checks."""
    return cc.generate(cc.system_spec("henon", transient=1000), 100_000)


@pytest.fixture(scope="session")
def logistic_series():
    return cc.generate(cc.system_spec("logistic", transient=100), 3000)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
