import pytest

_VERDICTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_VERDICTS] = {}


@pytest.fixture
def criterion(request, capsys):
    """Record and print one acceptance verdict line, then assert it."""
    verdicts = request.config.stash[_VERDICTS]

    def record(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        verdicts[number] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    verdicts = config.stash.get(_VERDICTS, {})
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(verdicts):
        terminalreporter.write_line(verdicts[number])
