import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cyclidic.elliptic import get_table

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

A = (0.0, 1.0, 2.0, 3.0)


@pytest.fixture(scope="session")
def table():
    return get_table(A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = {}


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance outcome: criterion(k, ok, detail)."""

    def record(k, ok, detail=""):
        _CRITERIA[k] = (bool(ok), detail)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        ok, detail = _CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
