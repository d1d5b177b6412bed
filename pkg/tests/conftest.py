import numpy as np
import pytest

from sl2reps import linalg2
from sl2reps.presentation import parse_presentation
from sl2reps.repvar import Representation, weeks_geometric, weeks_presentation


def random_sl2(rng, scale=0.5):
    return linalg2.exp_traceless(scale * (rng.normal(size=3) + 1j * rng.normal(size=3)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def weeks():
    return weeks_presentation()


@pytest.fixture(scope="session")
def weeks_ref():
    return weeks_geometric(0)


@pytest.fixture(scope="session")
def z_group():
    return parse_presentation("a |")


@pytest.fixture(scope="session")
def z2_group():
    return parse_presentation("a, b | a b A B")


def diag_rep(P, *entries):
    return Representation(P, tuple(np.diag([z, 1 / z]).astype(complex) for z in entries))


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(module.RESULTS):
        passed, detail = module.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
