import os
from pathlib import Path

import numpy as np
import pytest

from eigennet.synthetic import synthetic_faces, write_orl_tree

REPO = Path(__file__).resolve().parents[1]
ORL_ROOT = Path(os.environ.get("ORL_ROOT", REPO / "data" / "orl_faces"))

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def small_faces():
    """40 subjects x 10 samples at 23x28 pixels, ORL-shaped but fast."""
    return synthetic_faces(width=23, height=28, seed=1)


@pytest.fixture(scope="session")
def small_tree(tmp_path_factory, small_faces):
    return write_orl_tree(tmp_path_factory.mktemp("synthetic") / "orl", small_faces)


def pytest_runtest_logreport(report):
    marker = getattr(report, "_criterion", None)
    if marker is None or (report.when != "call" and report.passed):
        return
    number, text = marker
    if any(n == number for n, *_ in _criteria):
        return
    measured = "; ".join(f"{k}={v}" for k, v in report.user_properties)
    crash = getattr(report.longrepr, "reprcrash", None)
    if report.failed and crash is not None:
        reason = crash.message.splitlines()[0]
        measured = f"{measured}; {reason}" if measured else reason
    _criteria.append((number, text, "PASS" if report.passed else "FAIL", measured))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result()._criterion = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, status, measured in sorted(_criteria):
        line = f"[{status}] criterion {number:>2}: {text}"
        if measured:
            line += f"  ({measured})"
        terminalreporter.write_line(line)
