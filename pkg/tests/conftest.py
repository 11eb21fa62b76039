import numpy as np
import pytest

from wavedmd.ingest import Panel


def make_panel(values, ids=None, start=0):
    values = np.atleast_2d(np.asarray(values, dtype=float))
    ids = ids or [f"s{i}" for i in range(values.shape[0])]
    return Panel(ids, np.arange(start, start + values.shape[1]), values, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
