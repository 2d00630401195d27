import pytest

CRITERION_LINES = []


@pytest.fixture
def report_criterion():
    """Record a criterion's one-line verdict for the terminal summary."""

    def record(line):
        print(line)
        CRITERION_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
