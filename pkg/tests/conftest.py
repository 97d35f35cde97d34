import pytest

_CRITERIA: list[str] = []


class Criterion:
    """Record a PASS/FAIL line for an acceptance criterion, then assert."""

    def check(self, label: str, ok: bool, detail: str) -> None:
        _CRITERIA.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        assert ok, f"{label}: {detail}"

    def note(self, label: str, detail: str) -> None:
        _CRITERIA.append(f"NOTE  {label}: {detail}")


@pytest.fixture
def criterion():
    return Criterion()


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
