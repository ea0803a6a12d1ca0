"""Per-criterion summary for the acceptance suite.

Tests marked ``@pytest.mark.criterion(n, title)`` are collected here and one
pass/fail line per criterion is written at the end of the run.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    entry = _RESULTS.setdefault(n, [title, True])
    if report.failed:
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        title, ok = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'pass' if ok else 'FAIL'}  {title}")
