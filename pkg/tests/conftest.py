import pytest

from ou_selfnorm.sampling import RngStream

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return RngStream(12345, 0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
