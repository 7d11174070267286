import pytest

_CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")
    config.stash[_CRITERIA_KEY] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("criterion")
    if mark and (report.when == "call" or report.failed):
        n, title = mark.args
        seen = item.config.stash[_CRITERIA_KEY]
        ok = report.passed and seen.get(n, (title, True))[1]
        seen[n] = (title, ok)
    return report


def pytest_terminal_summary(terminalreporter, config):
    seen = config.stash[_CRITERIA_KEY]
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(seen):
        title, ok = seen[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}")
