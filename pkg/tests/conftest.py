import numpy as np
import pytest

from wobblesim.spectrum import ChannelSpec, reference_channel
from wobblesim.wobble import PitchProcessSpec

DEG = np.pi / 180


@pytest.fixture
def ch6():
    return reference_channel(6e9)


@pytest.fixture
def los_only():
    """Pure-LoS link with wavelength 0.05 m, the closed-form example scenario."""
    return ChannelSpec(carrier_hz=299_792_458.0 / 0.05, num_mpc=0)


@pytest.fixture
def wiener():
    return PitchProcessSpec.wiener(1.0)


@pytest.fixture
def sinus5():
    return PitchProcessSpec.sinusoid(5 * DEG)
