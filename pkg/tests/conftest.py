import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from cascadeq import NetworkModel

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture
def two_node() -> NetworkModel:
    """Two nodes triggering each other; the worked example used throughout."""
    return NetworkModel.from_triggers([0.2, 0.7], [0.3, 0.8], {(1, 2): 0.2, (2, 1): 0.8})


@pytest.fixture
def one_node() -> NetworkModel:
    return NetworkModel.from_triggers([0.3], [0.1], {})


@pytest.fixture
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        terminal = item.config.pluginmanager.get_plugin("terminalreporter")
        if terminal is not None:
            terminal.write_line(f"{item.name}: {'PASS' if report.passed else 'FAIL'}")
