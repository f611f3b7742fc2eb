import os
import sys

import numpy as np
import pytest

# Add repo root to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from Diamond.analysis import sample_gains
from Diamond.channel import ChannelGains, derive


@pytest.fixture
def caps_for():
    def build(*gains):
        return derive(ChannelGains(*gains))
    return build


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def random_channels():
    return [sample_gains(11, i) for i in range(300)]
