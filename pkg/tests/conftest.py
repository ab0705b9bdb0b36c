import json
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from skewfibers.system import default_config  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def p():
    return default_config(0.01)


@pytest.fixture(scope="session")
def delta_hat_doc():
    return json.loads((HERE / "fixtures" / "delta_hat.json").read_text())


@pytest.fixture(scope="session")
def delta_hat(delta_hat_doc):
    return delta_hat_doc["delta_hat"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
