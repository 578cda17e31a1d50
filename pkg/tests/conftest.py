from __future__ import annotations

import pytest

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture(scope="session")
def criterion_log(pytestconfig):
    """Record one pass/fail line per acceptance criterion, printed at the end of the run."""
    lines = pytestconfig.stash[_CRITERIA]

    def record(number: int, title: str, passed: bool, detail: str = "") -> None:
        status = "PASS" if passed else "FAIL"
        lines[number] = f"[{status}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_CRITERIA, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
