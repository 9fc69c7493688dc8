"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import re

import pytest

_DETAILS: dict[int, list[str]] = {}
_OUTCOMES: dict[int, list[bool]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


@pytest.fixture
def measured(request):
    """Callable recording a measurement line for the criterion under test."""
    m = _CRITERION.search(request.node.nodeid)

    def note(text: str):
        if m:
            _DETAILS.setdefault(int(m.group(1)), []).append(text)

    return note


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if m and (report.when == "call" or report.outcome != "passed"):
        _OUTCOMES.setdefault(int(m.group(1)), []).append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        status = "PASS" if all(_OUTCOMES[n]) else "FAIL"
        detail = "; ".join(_DETAILS.get(n, []))
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
