import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sympass import Domain, EnergySpec, LambdaFamily

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def dom65():
    return Domain(1, 8.0, 65)


@pytest.fixture(scope="session")
def dom129():
    return Domain(1, 8.0, 129)


@pytest.fixture(scope="session")
def dom2d():
    return Domain(2, 4.0, 17)


@pytest.fixture(scope="session")
def fam65(dom65):
    return LambdaFamily(EnergySpec(), dom65)


@pytest.fixture(scope="session")
def fam129(dom129):
    return LambdaFamily(EnergySpec(), dom129)


@pytest.fixture(scope="session")
def fam2d(dom2d):
    return LambdaFamily(EnergySpec(), dom2d)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
