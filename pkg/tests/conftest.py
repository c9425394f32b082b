import pytest

_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the outcome line for an acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_LINES[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
