import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

N = 8


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def fixtures_built():
    from abundle.fixtures import build_fixture, fixture_names
    return {name: build_fixture(name) for name in fixture_names()}


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """``criterion(n, passed, detail)`` records and prints one acceptance line."""
    def record(n, passed, detail):
        line = f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
