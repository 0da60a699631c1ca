import numpy as np
import pytest

from zmcss.fields import Grid2D, Field2D

_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def gauss256():
    return Field2D.gaussian(Grid2D(12.0, 256), 1.0, 1.0)


@pytest.fixture(scope="session")
def gauss128():
    return Field2D.gaussian(Grid2D(12.0, 128), 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid] = (report.outcome, report.duration)
    elif "test_acceptance.py" in report.nodeid and report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE[report.nodeid] = (report.outcome, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, dur) in sorted(_ACCEPTANCE.items(), key=lambda kv: _order(kv[0])):
        name = nodeid.split("::")[-1]
        status = "PASS" if outcome == "passed" else "FAIL" if outcome == "failed" else outcome.upper()
        terminalreporter.write_line(f"{status:5s} {name}  ({dur:.1f} s)")


def _order(nodeid):
    name = nodeid.split("::")[-1]
    digits = "".join(ch for ch in name.split("_")[1] if ch.isdigit()) if "_" in name else ""
    return int(digits) if digits else 99
