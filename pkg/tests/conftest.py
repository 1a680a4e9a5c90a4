import math

import numpy as np
import pytest

from scpath.curvature_profile import VehicleLimits
from scpath.geometry import Configuration


@pytest.fixture(scope="session")
def limits():
    return VehicleLimits()


def random_configs(rng, n, kappa_max, xy=50.0, curvatures=None):
    """``n`` random (start, goal) pairs; curvature continuous or drawn from ``curvatures``."""
    out = []
    for _ in range(n):
        pair = []
        for _ in range(2):
            x, y = rng.uniform(-xy, xy, 2)
            th = rng.uniform(-math.pi, math.pi)
            k = rng.choice(curvatures) if curvatures is not None else rng.uniform(-kappa_max, kappa_max)
            pair.append(Configuration(float(x), float(y), float(th), float(k)))
        out.append(tuple(pair))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# criterion id -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'} - {detail}")
