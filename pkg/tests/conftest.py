import pytest

_LINES: list[str] = []


@pytest.fixture
def report():
    """Record a one-line pass/fail verdict for the terminal summary."""

    def _report(criterion: int, ok: bool, detail: str) -> None:
        _LINES.append(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        print(_LINES[-1])

    return _report


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES):
            terminalreporter.write_line(line)
