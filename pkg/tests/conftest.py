import math

import numpy as np
import pytest

from odx.cylmap import StandardLikeMap
from odx.kamcurve import GOLDEN, certify_diophantine, continuation
from odx.reducibility import reduce

# lines recorded by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def golden():
    return certify_diophantine(GOLDEN, 0.3, 2.05, 10**5)


@pytest.fixture(scope="session")
def smap():
    return StandardLikeMap.chirikov(0.05)


@pytest.fixture(scope="session")
def linear_map():
    return StandardLikeMap.chirikov(0.0)


@pytest.fixture(scope="session")
def curve(smap, golden):
    return continuation(smap, golden, 0.05)


@pytest.fixture(scope="session")
def frame(curve, smap):
    return reduce(curve, smap)


def wrapped_dist(a, b):
    return abs(((a - b + 0.5) % 1.0) - 0.5)


def chirikov_lift(k, x, y, n):
    """Scalar reference iteration of the Chirikov map without reduction mod 1."""
    for _ in range(n):
        y = y + k * math.sin(2 * math.pi * x)
        x = x + y
    return x, y


def sample_curve(curve, s):
    s = np.asarray(s, dtype=float)
    return s + curve.psi(s), curve.eta(s)
