import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from beamsim import ArrayConfig, ChannelEnsemble, sample_channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_unit(n, rng):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def make_channel(seed, n_t=8, n_r=8, num_paths=4, **kwargs):
    config = ChannelEnsemble(arrays=ArrayConfig(n_t, n_r), num_paths=num_paths, **kwargs)
    return sample_channel(config, np.random.default_rng(seed))
