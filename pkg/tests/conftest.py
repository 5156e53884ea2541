import numpy as np
import pytest

_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def record_criterion(request):
    """Record one acceptance line; printed again in the terminal summary."""
    store = request.config.stash[_ACCEPTANCE]

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash[_ACCEPTANCE]
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(store):
        terminalreporter.write_line(store[number])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

