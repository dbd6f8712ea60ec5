import numpy as np
import pytest

from voltstab import netmodel as nm

ACCEPTANCE_RESULTS = []


@pytest.fixture
def two_bus():
    return nm.two_bus_network()


@pytest.fixture
def two_bus_no_shunt():
    return nm.two_bus_network(y_shunt=None)


@pytest.fixture
def rng():
    return np.random.default_rng(20181)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
