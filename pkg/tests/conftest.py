import json

import pytest

from typeline.analyzer import fixture_path


@pytest.fixture
def fig5_source() -> str:
    return fixture_path("fig5.mc").read_text(encoding="utf-8")


@pytest.fixture
def fig5_inputs() -> dict:
    return json.loads(fixture_path("fig5.json").read_text(encoding="utf-8"))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
