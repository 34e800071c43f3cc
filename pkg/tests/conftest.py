from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance_log.TITLES):
        if n in acceptance_log.RESULTS:
            terminalreporter.write_line(acceptance_log.line(n))
        else:
            terminalreporter.write_line(f"SKIP criterion {n:2d} ({acceptance_log.TITLES[n]}) not run")
