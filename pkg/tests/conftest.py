from __future__ import annotations

import pytest

from pg3spreads.pipeline import context


@pytest.fixture(scope="session")
def ctx2():
    return context(2)


@pytest.fixture(scope="session")
def ctx3():
    return context(3)


@pytest.fixture(scope="session")
def ctx4():
    return context(4)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
