import random

import pytest
from hypothesis import HealthCheck, settings

from spatialscore.geometry import BBox

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def random_box(rng: random.Random, lo: float = 0.0, hi: float = 1.0) -> BBox:
    """Uniform random box with strictly positive extent inside [lo, hi]."""
    for _ in range(100):
        x0, x1 = sorted(rng.uniform(lo, hi) for _ in range(2))
        y0, y1 = sorted(rng.uniform(lo, hi) for _ in range(2))
        if x1 - x0 > 1e-3 and y1 - y0 > 1e-3:
            return BBox(x0, y0, x1, y1)
    raise AssertionError("could not draw a non-degenerate box")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xC0FFEE)
