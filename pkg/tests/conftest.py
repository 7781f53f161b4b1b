import pytest

from gqpack.heisenberg import heisenberg_group
from gqpack.kantor import find_kappa

# Filled by test_acceptance; printed at the end of every run.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def E3():
    return heisenberg_group(3)


@pytest.fixture(scope="session")
def E5():
    return heisenberg_group(5)


@pytest.fixture(scope="session")
def kappa3(E3):
    return find_kappa(E3.field)


@pytest.fixture(scope="session")
def kappa5(E5):
    return find_kappa(E5.field)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
