"""Shared pytest configuration.

Prints one PASS/FAIL line per acceptance criterion at the end of a run so
the acceptance suite reads as a checklist.
"""

from __future__ import annotations

import pytest

_ACCEPTANCE_RESULTS: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    if "test_acceptance" not in str(item.fspath):
        return
    criterion = item.function.__doc__ or item.name
    criterion = criterion.strip().splitlines()[0]
    _ACCEPTANCE_RESULTS[criterion] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for criterion, status in _ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"{status}: {criterion}")
