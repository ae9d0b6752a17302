from pathlib import Path

import pytest

from rulemc.rulebase import parse_rule_base

DATA = Path(__file__).parent / "data"
EXAMPLE_FILE = DATA / "example.rules"


@pytest.fixture(scope="session")
def example_text():
    return EXAMPLE_FILE.read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def example_rb(example_text):
    return parse_rule_base(example_text)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
