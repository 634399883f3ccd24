import pytest

from nlsdelta.core import default_grid, make_grid


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def fine_grid():
    return make_grid(-40.0, 40.0, 16001)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL summary line for an acceptance criterion."""
    def emit(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return passed
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
