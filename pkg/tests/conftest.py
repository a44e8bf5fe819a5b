import time

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = getattr(report, "criterion", None)
    if number is None:
        return
    entry = _CRITERIA[number]
    entry["tests"].append((report.nodeid.split("::")[-1], report.outcome, report.duration))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        number, title = mark.args
        _CRITERIA.setdefault(number, {"title": title, "tests": []})
        rep.criterion = number


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ok = entry["tests"] and all(o == "passed" for _, o, _ in entry["tests"])
        seconds = sum(d for _, _, d in entry["tests"])
        failed = [name for name, o, _ in entry["tests"] if o != "passed"]
        tail = f"  failing: {', '.join(failed)}" if failed else ""
        tr.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {entry['title']}  ({seconds:.1f} s){tail}")


@pytest.fixture
def timer():
    start = time.perf_counter()

    def elapsed():
        return time.perf_counter() - start

    return elapsed
