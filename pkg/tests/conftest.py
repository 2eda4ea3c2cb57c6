"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(tag, title): acceptance criterion label")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        prev = _OUTCOMES.get(key, "PASS")
        _OUTCOMES[key] = "PASS" if prev == "PASS" and rep.passed else "FAIL"


def _order(tag):
    num = "".join(ch for ch in tag if ch.isdigit())
    return (int(num or 0), tag)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for (tag, title), verdict in sorted(_OUTCOMES.items(), key=lambda kv: _order(kv[0][0])):
        terminalreporter.write_line(f"{verdict}  criterion {tag}: {title}")
