import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "smooth example, r=1, rho=1 temporal table",
    2: "smooth example, r=1, rho=30 temporal table",
    3: "smooth example spatial table and S_rate",
    4: "singular example, r=1 temporal table",
    5: "singular example, graded temporal table",
    6: "coefficient sign census",
    7: "weight-row property suite",
    8: "discrete-operator oracle suite",
    9: "stability proxy",
    10: "tridiagonal solver",
}

_outcomes: dict[int, list[bool]] = {}
_diagnostics: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.fixture
def diagnostics():
    return _diagnostics


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marker.args[0], []).append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    if _diagnostics:
        tr.section("acceptance diagnostics")
        for line in _diagnostics:
            tr.write_line(line)
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
            status += f" ({sum(results)}/{len(results)} checks)"
        tr.write_line(f"criterion {n:>2}: {status:<20} {title}")
