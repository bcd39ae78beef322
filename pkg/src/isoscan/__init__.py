"""Simulation and isoline processing of polarimetric FM-CW scans of chipless sensors."""

from .analysis import ScenarioResult, SensorReading, dynamic_range, match_regions, report, sensor_targets
from .imaging import PolarimetricImage, ScanGrid, Window, beat_spectrum, build_image, image_max_in_window
from .isolines import (Isoline, IsolineSet, Region, cluster_regions, extract_isolines, extract_slice_contours,
                       region_overlap)
from .radar_core import RadarConfig, RangeAxis, echo_level, range_resolution, range_to_bin
from .scenario_file import load_scenario
from .scene import Scatterer, ScatteringMatrix, Scenario, antenna_gain, direction_of, effective_rcs

__version__ = "0.1.0"
