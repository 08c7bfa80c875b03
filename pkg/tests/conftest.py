import pytest

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_KEY] = []


@pytest.fixture
def record(request):
    """Collect one acceptance verdict line for the terminal summary."""
    lines = request.config.stash[_KEY]

    def _rec(num, ok, detail):
        lines.append((num, ok, detail))
    return _rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = sorted(config.stash.get(_KEY, []))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in lines:
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
