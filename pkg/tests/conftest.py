import numpy as np
import pytest

from stiefel_compare.estimation import WORKERS_ENV


@pytest.fixture(autouse=True)
def _single_worker(monkeypatch):
    # tests opt into multiple workers explicitly
    monkeypatch.setenv(WORKERS_ENV, "1")


@pytest.fixture
def rng():
    return np.random.default_rng(20110323)


def within_stderr(values, target, z=3.0):
    values = np.asarray(values, dtype=float)
    se = values.std(ddof=1) / np.sqrt(values.shape[0])
    return abs(values.mean() - target) <= z * se


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""
    log = request.config.stash[_ACCEPTANCE_KEY]

    def record(name, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} {name}: {detail}"
        print(line)
        log.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
