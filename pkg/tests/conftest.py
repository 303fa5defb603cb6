from __future__ import annotations

import os
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> [title, outcomes]
_ACCEPTANCE: "OrderedDict[int, list]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.fixture(scope="session")
def pool():
    """One process pool shared by all multi-worker tests."""
    with ProcessPoolExecutor(max_workers=4) as ex:
        yield ex


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _ACCEPTANCE.setdefault(number, [title, []])
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry[1].append(rep.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, outcomes = _ACCEPTANCE[number]
        if not outcomes or "skipped" in outcomes and "failed" not in outcomes:
            status = "SKIP"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title}  ({len(outcomes)} checks)")
