import re

import pytest


@pytest.fixture
def record(request):
    """Attach a one-line detail string to the running acceptance test."""
    def _record(detail):
        request.node.user_properties.append(("detail", detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "acceptance" not in rep.keywords:
                continue
            m = re.search(r"test_c(\d+)_", rep.nodeid)
            if not m:
                continue
            detail = dict(rep.user_properties).get("detail", "")
            rows.append((int(m.group(1)), "PASS" if outcome == "passed" else "FAIL", detail))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n, verdict, detail in sorted(rows):
        terminalreporter.write_line(f"[{verdict}] C{n}: {detail}")
