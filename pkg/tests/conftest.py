import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_report  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not acceptance_report.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_report.lines():
        terminalreporter.write_line(line)
