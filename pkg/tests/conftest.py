"""Collects acceptance outcomes and prints one line per criterion."""

import pytest

_OUTCOMES: dict[int, tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    n = marker.args[0]
    title = (item.function.__doc__ or item.name).strip().splitlines()[0]
    prev_ok = _OUTCOMES.get(n, (True, title))[0]
    _OUTCOMES[n] = (prev_ok and report.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        ok, title = _OUTCOMES[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")
