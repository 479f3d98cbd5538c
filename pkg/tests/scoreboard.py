"""One-line PASS/FAIL verdicts, replayed after the run finishes.

pytest captures test stdout, so verdict lines printed inside a test are
invisible unless it fails.  Tests record their line here instead; the
conftest terminal-summary hook prints the collected scoreboard at the end
of the run, where it cannot be swallowed.
"""

LINES: list[str] = []


def report(label: str, ok: bool, detail: str) -> None:
    """Record and print one verdict line, then assert it."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line
