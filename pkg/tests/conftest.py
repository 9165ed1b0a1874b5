import math

import numpy as np
import pytest

from helmddm.medium import Box, SourceKind, SourceSpec, constant_medium, layered_medium
from helmddm.partition import GridSpec
from helmddm.problem import ProblemSpec


def make_problem(n1=1, n2=1, core=20, h=0.01, n_ramp=20, n_overlap=10, ppw=11.0,
                 source=None, kind=SourceKind.POINT, layered=False, c_sigma=25.0):
    """Square cores of ``core`` cells; frequency set for about ``ppw`` nodes per wavelength."""
    box = Box(0.0, n1 * core * h, -n2 * core * h, 0.0)
    grid = GridSpec(box, h, n_ramp, n_overlap, n1, n2)
    freq = 1.0 / (ppw * h)
    extent = box.dilate(n_ramp * h)
    if layered:
        medium = layered_medium(2 * math.pi * freq, box, extent=extent)
    else:
        medium = constant_medium(2 * math.pi * freq, box, extent=extent)
    if source is None:
        # a node of the first core, off every symmetry line
        source = (box.x0 + h * round(core / 4), box.y0 + h * round(core / 3))
    return ProblemSpec(grid, medium, SourceSpec(kind, source), c_sigma)


@pytest.fixture
def problem_factory():
    return make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated after the test summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
