import pytest

ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one acceptance line, then assert it."""
    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE[number] = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
        print(ACCEPTANCE[number])
        assert ok, detail
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
