import numpy as np
import pytest

from quantum.qcore import RngStream, random_hermitian
from quantum.measure import polarization_state


@pytest.fixture
def polarized():
    """0.6|h> + 0.8|v>, the running example of the polarization experiments."""
    return polarization_state(0.6, 0.8)


@pytest.fixture
def stream():
    def make(stream_id: int = 0, seed: int = 20240611) -> RngStream:
        return RngStream(seed, stream_id)
    return make


@pytest.fixture
def hermitian3():
    return random_hermitian(3, np.random.default_rng(7))
