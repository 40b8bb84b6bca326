import numpy as np
import pytest

from concordia import E, M, PI, W

from .oracles import random_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def corpus(rng):
    return [M, W, PI, E] + [random_grid(m, rng) for m in (2, 3, 8, 16)]


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
