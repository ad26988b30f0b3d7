import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report(request):
    """Print and record one PASS/FAIL line for an acceptance criterion."""
    def emit(number, text, ok, elapsed=None, budget=None):
        timing = ""
        if elapsed is not None:
            timing = f" [{elapsed:.2f}s" + (f" / budget {budget:g}s]" if budget else "]")
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}{timing}"
        print(line)
        _ACCEPTANCE_LINES.append((number, line))
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
