from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from painleve.acceptance import _report, _system
from painleve.balance import balance_from_row
from painleve.fixtures import table_row

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def system():
    return _system()


@pytest.fixture(scope="session")
def report():
    """Cached exact resonance report for ``(triplet, member)``."""
    return _report


@pytest.fixture(scope="session")
def balance():
    return lambda t, m: balance_from_row(table_row(t, m))


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split(".")[0].split()[-1])):
        terminalreporter.write_line(line)
