import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
