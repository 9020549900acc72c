import numpy as np
import pytest

from kinloc.model import SensorArray
from kinloc.montecarlo import DEFAULT_SENSOR_POSITIONS


@pytest.fixture(scope="session")
def sensors8():
    """The reference eight-sensor layout used by the shipped experiments."""
    return SensorArray(DEFAULT_SENSOR_POSITIONS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
