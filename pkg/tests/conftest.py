import pytest

from isoscan.analysis import sensor_targets
from isoscan.imaging import build_image
from isoscan.radar_core import RadarConfig, RangeAxis
from isoscan.scenario_file import bundled, load_scenario
from isoscan.imaging import ScanGrid

# verdict lines appended by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []

# target echo maxima, dB: (R, VV ON, VV OFF, dVV, VH ON, VH OFF, dVH)
REFERENCE_TABLE = {
    "sensor1": (2.5, -1.9, 3.7, 5.6, 2.6, -4.9, 7.5),
    "sensor2": (3.6, -4.9, -3.0, 1.9, -0.9, -17.3, 16.4),
    "sensor3": (4.5, -0.1, -1.0, 0.9, 1.1, -16.2, 17.3),
    "sensor4": (5.8, -4.5, -1.6, 2.9, 0.2, -9.7, 9.9),
}


@pytest.fixture(scope="session")
def calib_on():
    return load_scenario(bundled("calibration_on.json"))


@pytest.fixture(scope="session")
def calib_off():
    return load_scenario(bundled("calibration_off.json"))


@pytest.fixture(scope="session")
def image_on(calib_on):
    return build_image(calib_on, seed=0)


@pytest.fixture(scope="session")
def image_off(calib_off):
    return build_image(calib_off, seed=0)


@pytest.fixture(scope="session")
def targets(calib_on):
    return {t.id: t for t in sensor_targets(calib_on)}


@pytest.fixture
def quiet_config():
    return RadarConfig(noise_floor=None)


@pytest.fixture
def small_grid():
    cfg = RadarConfig()
    return ScanGrid(-4.0, 4.0, 1.0, -3.0, 3.0, 0.3, RangeAxis.for_config(cfg, 64))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
