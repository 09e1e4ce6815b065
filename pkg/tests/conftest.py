import math

import numpy as np
import pytest

from randles_id import EcmParams, FrequencyTriplet

# 50 Ah prismatic cell, SoC 50 %, 25 degC
PRISMATIC = EcmParams(r0=0.826e-3, r1=0.346e-3, c1=7.07, aw=0.1032e-3)
REF_TRIPLET = FrequencyTriplet(0.116, 20.55, 648.65)

# 21700 cells: (soc, case, r0 mOhm, r1 mOhm, c1 F, aw, reference RMSE %)
CYLINDRICAL_ROWS = [
    (20, "fresh", 22.533, 3.352, 0.393, 0.001769, 1.14),
    (20, "151 cycles", 23.658, 5.055, 0.604, 0.002221, 1.69),
    (20, "350 cycles", 24.052, 5.457, 0.624, 0.002582, 1.88),
    (50, "fresh", 22.421, 2.602, 0.354, 0.001951, 0.76),
    (50, "151 cycles", 23.494, 3.317, 0.566, 0.001857, 1.07),
    (50, "350 cycles", 23.841, 3.516, 0.631, 0.001919, 1.15),
    (80, "fresh", 22.339, 2.472, 0.421, 0.002579, 0.94),
    (80, "151 cycles", 23.358, 3.406, 0.666, 0.002611, 1.2),
    (80, "350 cycles", 23.683, 3.879, 0.727, 0.002684, 1.32),
]


def cylindrical_params(row) -> EcmParams:
    _, _, r0, r1, c1, aw, _ = row
    return EcmParams(r0 * 1e-3, r1 * 1e-3, c1, aw)


def log_grid(f_lo, f_hi, per_decade=10, extra=()):
    n = int(round(per_decade * math.log10(f_hi / f_lo))) + 1
    return np.unique(np.concatenate([np.geomspace(f_lo, f_hi, n), np.asarray(extra, dtype=float)]))


@pytest.fixture
def prismatic():
    return PRISMATIC


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


_ACCEPTANCE: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        entry = _ACCEPTANCE.setdefault(number, [title, 0, 0])
        entry[1 if report.passed else 2] += 1


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion, failing if any of its cases failed."""
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, failed = _ACCEPTANCE[number]
        verdict = "FAIL" if failed else "PASS"
        terminalreporter.write_line(f"criterion {number} [{title}]: {verdict} ({passed} passed, {failed} failed)")
