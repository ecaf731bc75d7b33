import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LARGE = os.environ.get("RHOBOUND_LARGE") == "1"

# criterion number -> result line, echoed in the terminal summary
CRITERIA = {}
CRITERION_COUNT = 17


def pytest_collection_modifyitems(config, items):
    if LARGE:
        return
    skip = pytest.mark.skip(reason="large-memory tier; set RHOBOUND_LARGE=1")
    for item in items:
        if "large" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, CRITERION_COUNT + 1):
        terminalreporter.write_line(CRITERIA.get(n, f"criterion {n:2d}: NOT RUN (skipped or deselected)"))
