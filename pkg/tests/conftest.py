"""Per-criterion pass/fail summary for the acceptance suite."""

from collections import defaultdict

import pytest

CRITERIA = {
    1: "beam fixed point and classical recovery",
    2: "frame blocks, ranks and equilibrium",
    3: "gasket modes from random restarts",
    4: "axial translational sub-blocks",
    5: "scaling law under repeated condensation",
    6: "condensed vs direct solve of a two-level element",
    7: "equilibrium, block-pattern, PSD and null-space suites",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marks = [m.args[0] for m in item.iter_markers("criterion")]
    if not marks:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        for n in marks:
            _outcomes[n].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n, [])
        status = "NOT RUN" if not results else ("PASS" if all(results) else "FAIL")
        terminalreporter.write_line(f"criterion {n}: {status} - {title} ({len(results)} checks)")
