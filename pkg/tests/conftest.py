"""Acceptance verdict collection: one PASS/FAIL line per criterion."""

import pytest

_VERDICTS: dict[int, str] = {}


def _line(number: int, ok: bool, detail: str) -> str:
    return f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.fixture
def verdict(request):
    number = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str) -> None:
        line = _line(number, ok, detail)
        _VERDICTS[number] = line
        print(line)
        assert ok, line

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call" and report.failed and marker.args[0] not in _VERDICTS:
        _VERDICTS[marker.args[0]] = _line(marker.args[0], False, f"error: {call.excinfo.typename}")


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_VERDICTS):
            terminalreporter.write_line(_VERDICTS[number])
