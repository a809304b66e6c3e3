import sys

import pytest

from teamsynth.models import load_fleet
from teamsynth.pipeline import synthesize, task_text


@pytest.fixture(scope="session")
def fleet():
    return load_fleet("warehouse")


@pytest.fixture(scope="session")
def task1_text():
    return task_text("task1")


@pytest.fixture(scope="session")
def task2_text():
    return task_text("task2")


@pytest.fixture(scope="session")
def syn1(fleet, task1_text):
    return synthesize(task1_text, fleet)


@pytest.fixture(scope="session")
def syn2(fleet, task2_text):
    return synthesize(task2_text, fleet.subset(["green", "orange", "pink"]), strict=True)


@pytest.fixture(scope="session")
def syn1_ablated(fleet, task1_text):
    return synthesize(task1_text, fleet, insert=False)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        status, text = results[n]
        terminalreporter.write_line(f"criterion {n}: {status} {text}")
