import pytest

ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def record_criterion():
    """Store a one-line verdict for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"AC{number:<2d} {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
