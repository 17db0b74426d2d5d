import warnings

import numpy as np
import pytest

from ruinalarm.alarm import AlarmParams
from ruinalarm.compare import schedule_from_pool
from ruinalarm.model import CapitalSchedule, Exponential, Pareto, RiskModel
from ruinalarm.simulate import simulate_pool, surface_from_pool, time_grid

EX2_TIMES = (0.29, 0.58, 0.91, 1.28)


@pytest.fixture(autouse=True)
def _quiet_censoring():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        yield


@pytest.fixture(scope="session")
def ex1_model():
    """Exponential claims, no loading: rho=0.5, lambda=20, c=25, u0=15."""
    return RiskModel(Exponential(0.5), 20.0, 25.0, 15.0)


@pytest.fixture(scope="session")
def ex2_model():
    """Pareto claims with infinite mean: kappa=0.95, lambda=20, c=40, u0=50."""
    return RiskModel(Pareto(1.0, 0.95), 20.0, 40.0, 50.0)


@pytest.fixture(scope="session")
def ex2_params():
    return AlarmParams(0.45, 0.225, 1.0)


@pytest.fixture(scope="session")
def ex2_schedule():
    return CapitalSchedule(50.0, EX2_TIMES, (5.0,) * 4)


@pytest.fixture(scope="session")
def ex2_pool(ex2_model):
    """100k paths to t=4, truncated above outgo 200."""
    return simulate_pool(ex2_model, 4.0, 100_000, 0, 200.0)


@pytest.fixture(scope="session")
def ex2_alarms(ex2_pool, ex2_schedule):
    return schedule_from_pool(ex2_pool, ex2_schedule, 0.225)


@pytest.fixture(scope="session")
def ex2_surface(ex2_pool):
    return surface_from_pool(ex2_pool, np.arange(0.0, 181.0, 1.0), time_grid(4.0))
