import sys

import pytest

sys.setrecursionlimit(max(sys.getrecursionlimit(), 10000))

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n, title = mark.args
    prev = _RESULTS.get(n, (True, title, []))
    detail = getattr(item, "acceptance_detail", "")
    _RESULTS[n] = (prev[0] and rep.passed, title, prev[2] + ([detail] if detail else []))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, title, details = _RESULTS[n]
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {title}{extra}")
