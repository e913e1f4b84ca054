import sys

import pytest
from hypothesis import settings

from pairgraph import _backend

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def pytest_addoption(parser):
    parser.addoption(
        "--update-goldens",
        action="store_true",
        default=False,
        help="rewrite tests/goldens/scenarios/*.jsonl from the current build",
    )


@pytest.fixture
def update_goldens(request):
    return request.config.getoption("--update-goldens")


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod and mod.REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT_LINES:
            terminalreporter.write_line(line)
