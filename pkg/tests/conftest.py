import pytest

from icolab import scenarios

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grav_switch():
    return scenarios.gravitational_switch()


@pytest.fixture(scope="session")
def paths_switch():
    return scenarios.superposed_paths_switch()


@pytest.fixture(scope="session")
def definite():
    return scenarios.definite_control()


@pytest.fixture
def record_criterion():
    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
