import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from windforest import synthetic  # noqa: E402
from windforest.timeseries import WindSeries  # noqa: E402

ACCEPTANCE_RESULTS = []


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="speeds.csv"):
        path = tmp_path / name
        path.write_bytes(text.encode("utf-8"))
        return path

    return _write


@pytest.fixture(scope="session")
def ar2_series():
    return synthetic.ar2(20000, 1.2, -0.3, 0.5, seed=0)


@pytest.fixture
def small_series():
    return WindSeries(0, 600, np.array([1.0, 2.0, 3.0, 4.0, 5.0]))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
