import pytest

# criterion id -> printed line, filled by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        tr.write_line(f"{key} {ACCEPTANCE_LINES[key]}")
    passed = sum(line.startswith("PASS") for line in ACCEPTANCE_LINES.values())
    tr.write_line(f"{passed}/{len(ACCEPTANCE_LINES)} criteria pass")
