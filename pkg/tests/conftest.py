import pytest

from weaksource import new_source, partition_sequences

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def bern02():
    return new_source([0.2, 0.8])


@pytest.fixture(scope="session")
def part10(bern02):
    """pmf [0.2, 0.8], n=10, eps=0.2: 175 typical, 849 atypical blocks."""
    return partition_sequences(bern02, 10, 0.2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
