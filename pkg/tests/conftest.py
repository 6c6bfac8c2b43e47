"""Shared test helpers: the acceptance-criteria recorder.

Acceptance tests call ``record_criterion``; the terminal summary hook
prints one pass/fail line per criterion after the run, uncaptured.
"""

_RECORDS = []


def record_criterion(num: int, name: str, passed: bool, detail: str = "") -> None:
    _RECORDS.append((num, name, bool(passed), detail))
    print(f"[criterion {num}] {'PASS' if passed else 'FAIL'} {name}"
          + (f": {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RECORDS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num, name, passed, detail in sorted(_RECORDS):
        line = f"criterion {num}: {'PASS' if passed else 'FAIL'} - {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
