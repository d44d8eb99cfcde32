import pytest

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Collect ``(number, title, passed, detail)`` for the acceptance summary."""

    def add(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
        return bool(passed)

    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number:2d}. {title}: {detail}")
