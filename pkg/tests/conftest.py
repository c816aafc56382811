import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from demreg.grid_io import Grid  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"

_acceptance = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _acceptance.append((marker.args[0], marker.args[1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(_acceptance):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_grid(seed, nrows=8, ncols=8, nodata_frac=0.0, cellsize=30.0):
    gen = np.random.default_rng(seed)
    values = gen.normal(500.0, 250.0, (nrows, ncols))
    if nodata_frac:
        values[gen.random((nrows, ncols)) < nodata_frac] = -9999.0
    return Grid.from_array(values, xllcorner=float(gen.uniform(-1e5, 1e5)),
                           yllcorner=float(gen.uniform(-1e5, 1e5)), cellsize=cellsize)
