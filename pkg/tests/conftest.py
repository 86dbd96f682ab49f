import numpy as np
import pytest
from hypothesis import settings

from fdastap.scene import reference_config, uniform_ring_scene

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

# Lines recorded by tests/test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cfg_beta1():
    return reference_config(1)


@pytest.fixture(scope="session")
def cfg_beta_half():
    return reference_config(0.5)


@pytest.fixture(scope="session")
def cfg_approx():
    # 2d/lambda = 0.8, off the exact-rank condition
    return reference_config(1, spacing=0.4 * 0.3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def clutter_only_np3():
    return uniform_ring_scene(3, cnr_db=None, noise_power=0.0)
