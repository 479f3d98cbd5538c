import sys
from pathlib import Path

# make the sibling oracles/scoreboard modules importable regardless of
# invocation dir
sys.path.insert(0, str(Path(__file__).parent))

import scoreboard  # noqa: E402


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if scoreboard.LINES:
        terminalreporter.section("scoreboard")
        for line in scoreboard.LINES:
            terminalreporter.line(line)
