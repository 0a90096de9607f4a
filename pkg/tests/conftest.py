import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report(capsys):
    """Record one pass/fail line per acceptance criterion, echoed immediately and in the summary."""

    def report(number, title, passed, detail):
        line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'} {title}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
