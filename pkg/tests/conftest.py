from __future__ import annotations

import re

import pytest

_DETAILS: dict[int, str] = {}


@pytest.fixture
def record():
    """``record(n, text)`` attaches a one-line summary to acceptance criterion ``n``."""

    def _record(n: int, text: str) -> None:
        _DETAILS[n] = text

    return _record


def pytest_terminal_summary(terminalreporter):
    outcomes: dict[int, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(status, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if m and (rep.when == "call" or status != "passed"):
                n = int(m.group(1))
                if outcomes.get(n) not in ("failed", "error"):
                    outcomes[n] = status
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(outcomes):
        mark = "PASS" if outcomes[n] == "passed" else outcomes[n].upper().replace("FAILED", "FAIL")
        terminalreporter.write_line(f"criterion {n:>2}: {mark:<5} {_DETAILS.get(n, '')}")
