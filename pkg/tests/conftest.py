import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, text): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        label, text = marker.args
        detail = getattr(item, "measured", "")
        _CRITERIA.append((label, "PASS" if report.passed else "FAIL", text, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, text, detail in _CRITERIA:
        line = f"{status} criterion {label}: {text}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
