import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def self_inverse_delta():
    return json.loads((FIXTURES / "self_inverse_delta.json").read_text())


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::test_a" not in rep.nodeid:
                continue
            name = rep.nodeid.split("::test_")[1]
            label = name.split("_")[0].upper()
            info = "; ".join(v for k, v in rep.user_properties if k == "acceptance")
            lines.append((label, "PASS" if outcome == "passed" else "FAIL", info))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, info in sorted(lines):
        terminalreporter.write_line(f"{label} {status}  {info}")
