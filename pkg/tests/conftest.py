"""Acceptance bookkeeping: one PASS/FAIL line per criterion at the end of the run."""
from __future__ import annotations

import pytest

_CRITERIA: dict[str, tuple[int, str]] = {}
_RESULTS: dict[int, list[bool]] = {}
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA[item.nodeid] = (number, title)
            _TITLES[number] = title


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    number, _ = _CRITERIA[report.nodeid]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        ok = report.passed and not hasattr(report, "wasxfail")
        _RESULTS.setdefault(number, []).append(ok)


def pytest_terminal_summary(terminalreporter):
    if not _TITLES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_TITLES):
        outcomes = _RESULTS.get(number, [])
        status = "NOT RUN" if not outcomes else "PASS" if all(outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {_TITLES[number]}")
