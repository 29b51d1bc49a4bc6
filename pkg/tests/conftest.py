import pytest

# criterion number -> (passed, summary line); filled by test_acceptance.py
ACCEPTANCE = {}


def record(number: int, passed: bool, text: str):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {text}"
    ACCEPTANCE[number] = (passed, line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n][1])
