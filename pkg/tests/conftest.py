"""Shared fixtures: acceptance-criterion reporting that survives capture."""

import pytest

_CRITERIA: list[tuple[int, str, bool, str]] = []


def record_criterion(number: int, name: str, ok: bool, detail: str = ""):
    _CRITERIA.append((number, name, ok, detail))


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(_CRITERIA):
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number} ({name}): {status}"
        if detail:
            line += f" - {detail}"
        terminalreporter.write_line(line)
