import pytest
from hypothesis import settings

from modal_nbe.checker import ALL_SYSTEMS

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_verdicts = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_verdicts] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_verdicts, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for the terminal summary; returns `ok`."""

    def record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
        request.config.stash[_verdicts].append(line)
        print(line)
        return ok

    return record


@pytest.fixture(params=ALL_SYSTEMS, ids=lambda s: s.value)
def system(request):
    return request.param
