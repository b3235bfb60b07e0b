import numpy as np
import pytest

from rangeseg import synthetic
from rangeseg.sensor import default_model, uniform_model


@pytest.fixture(scope="session")
def hdl_model():
    return default_model()

@pytest.fixture(scope="session")
def fixture_model():
    """All-downward 64-channel model the stock scenes are designed for."""
    return synthetic.fixture_model()


@pytest.fixture(scope="session")
def small_model():
    """Tiny geometry for hand-checkable cases: 8 channels, 16 columns."""
    return uniform_model(8, top_deg=-2.0, step_deg=2.0, azimuth_step_deg=22.5,
                         mount_height_m=1.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
