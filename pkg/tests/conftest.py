import math

import numpy as np
import pytest
from hypothesis import settings

from cocyclelab import CocycleGenerator, MapFamily

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

LOG2 = math.log(2.0)


@pytest.fixture
def doubling_tripling():
    return MapFamily.expanding_affine(2)


@pytest.fixture
def diag2():
    return CocycleGenerator.constant([[2.0, 0.0], [0.0, 0.5]])


@pytest.fixture
def pc_cocycle():
    return CocycleGenerator.piecewise_constant(
        [0.0, 0.5, 1.0], [[[2.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 3.0]]]
    )


def random_piecewise(rng, d=2, cells=3):
    """A well-conditioned piecewise-constant generator with random cells."""
    inner = np.sort(rng.uniform(0.05, 0.95, size=cells - 1))
    breaks = [0.0, *inner.tolist(), 1.0]
    mats = []
    for _ in range(cells):
        m = rng.normal(size=(d, d))
        while abs(np.linalg.det(m)) < 0.2:
            m = rng.normal(size=(d, d))
        mats.append(m)
    return CocycleGenerator.piecewise_constant(breaks, mats)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
