import numpy as np
import pytest
from hypothesis import settings

# MC-heavy property tests blow hypothesis' default deadline; statistical
# assertions inside them are seeded, so per-example timing is the only flake
# source worth disabling.
settings.register_profile("trapclock", deadline=None, max_examples=50)
settings.load_profile("trapclock")


@pytest.fixture
def np_rng():
    return np.random.default_rng(0xC10C)


@pytest.fixture
def stream():
    from trapclock.core import RngStream

    def make(stream_id=0, seed=2024):
        return RngStream(seed, stream_id)

    return make
