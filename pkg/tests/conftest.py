import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rrl.ring_sim import RingConfig  # noqa: E402


@pytest.fixture
def nonadjacent4():
    # ring order c, u, c, u
    return RingConfig.build(4, honest=[1, 3])


@pytest.fixture
def adjacent4():
    # ring order c, c, u, u
    return RingConfig.build(4, honest=[2, 3])
