from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from indunilm.fileio import load_preset
from indunilm.sim_core import simulate_facility


@lru_cache(maxsize=None)
def facility_year(preset: str, seed: int = 0):
    return simulate_facility(load_preset(preset, seed=seed))


@lru_cache(maxsize=None)
def hourly_facility(preset: str = "office-offenbach", seed: int = 0):
    """Uncalibrated hourly facility-year; cheap enough for property tests."""
    cfg = replace(load_preset(preset, seed=seed), sample_period=3600, year_length=8760)
    return simulate_facility(cfg, calibrate=False)


@pytest.fixture(scope="session")
def office():
    return facility_year("office-offenbach")


@pytest.fixture(scope="session")
def hourly():
    return hourly_facility()


def trapezoid_mwh(x: np.ndarray, period: int) -> float:
    """Independent trapezoid integral of a power trace in W, result in MWh."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.sum((x[1:] + x[:-1]) / 2.0) * period / 3.6e9)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'} | {detail}")
