"""Collects acceptance verdicts and prints them after the run."""
import contextlib

VERDICTS = {}


@contextlib.contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException:
        VERDICTS[number] = (title, "FAIL")
        print(f"CRITERION {number} FAIL: {title}")
        raise
    VERDICTS[number] = (title, "PASS")
    print(f"CRITERION {number} PASS: {title}")


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        title, verdict = VERDICTS[number]
        terminalreporter.write_line(f"{verdict} {number}. {title}")
