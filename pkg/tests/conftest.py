import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


class ForcedOutcomeRng:
    """Stand-in for a Generator that forces measurement branches.

    random() returns 0.0 to force the u < p_click branch (a click whenever
    p_click > 0), or a value just below 1 to force no-click.
    """

    def __init__(self, value: float = 0.0):
        self.value = value

    def random(self) -> float:
        return self.value


@pytest.fixture
def force_click():
    return ForcedOutcomeRng(0.0)


@pytest.fixture
def force_no_click():
    return ForcedOutcomeRng(1.0 - 1e-15)
