import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(acceptance_log.LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
