import pytest

ACCEPTANCE = {}


@pytest.fixture
def record():
    """Store one summary line per acceptance criterion for the terminal report."""

    def _record(criterion: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[criterion] = (passed, detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
