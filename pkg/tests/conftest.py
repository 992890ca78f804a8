import pytest
from hypothesis import HealthCheck, settings

from fracpot.multiterm import MultiTermSpec

settings.register_profile(
    "repo", deadline=None, max_examples=25, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def spec1():
    return MultiTermSpec((0.5,), (1.0,))


@pytest.fixture(scope="session")
def spec2():
    return MultiTermSpec((0.3, 0.7), (1.0, 1.0))


@pytest.fixture(scope="session")
def spec2w():
    return MultiTermSpec((0.3, 0.7), (1.0, 2.0))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
