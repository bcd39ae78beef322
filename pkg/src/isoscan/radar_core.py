"""FM-CW signal model: chirp parameters, range bins and the radar equation.

Echo levels live on a relative dB scale. A calibration offset is folded into
every :class:`RadarConfig` so that a reference target (``cal_rcs`` at
``cal_range``, both beams on axis) reads exactly 0 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
FOUR_PI_CUBED_DB = 30.0 * math.log10(4.0 * math.pi)


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeAxisError(IndexError):
    """Range or index outside a :class:`RangeAxis`."""


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RadarConfig:
    """Reader parameters.

    Defaults follow the 24 GHz reader: 23.8 GHz carrier, 2 GHz sweep, a
    28 dBi / 6 deg lens horn on transmit and two 20 dBi horns on receive.
    ``tx_power``, ``chirp_duration`` and the receive beamwidth are not
    published for that hardware; they only shift levels that the
    calibration offset absorbs anyway.
    """

    carrier_frequency: float = 23.8e9
    bandwidth: float = 2.0e9
    chirp_duration: float = 1.0e-3
    tx_gain: float = 28.0
    tx_hpbw: float = 6.0
    rx_gain_v: float = 20.0
    rx_gain_h: float = 20.0
    rx_hpbw: float = 20.0
    tx_power: float = 10.0
    noise_floor: float | None = -25.0
    noise_jitter_db: float = 0.5
    fft_size: int = 512
    range_max: float = 8.0
    cal_rcs: float = 0.0
    cal_range: float = 1.0
    cal_offset: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not self.carrier_frequency > self.bandwidth / 2:
            raise ValueError("carrier_frequency must exceed bandwidth / 2")
        if not self.chirp_duration > 0:
            raise ValueError("chirp_duration must be > 0")
        if not _is_power_of_two(int(self.fft_size)) or int(self.fft_size) != self.fft_size:
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if not self.range_max > 0:
            raise ValueError("range_max must be > 0")
        if self.tx_hpbw <= 0 or self.rx_hpbw <= 0:
            raise ValueError("beamwidths must be > 0")
        if not self.cal_range > 0:
            raise ValueError("cal_range must be > 0")
        if self.noise_jitter_db < 0:
            raise ValueError("noise_jitter_db must be >= 0")
        object.__setattr__(self, "cal_offset", self._uncalibrated(self.cal_rcs, self.cal_range))

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def chirp_slope(self) -> float:
        """Sweep rate in Hz/s."""
        return self.bandwidth / self.chirp_duration

    def rx_gain(self, rx_pol: str) -> float:
        pol = rx_pol.upper()
        if pol == "V":
            return self.rx_gain_v
        if pol == "H":
            return self.rx_gain_h
        raise ValueError(f"rx_pol must be 'V' or 'H', got {rx_pol!r}")

    def _uncalibrated(self, rcs: float, range_m: float, tx_gain: float | None = None,
                      rx_gain: float | None = None) -> float:
        tx = self.tx_gain if tx_gain is None else tx_gain
        rx = self.rx_gain_v if rx_gain is None else rx_gain
        return (self.tx_power + tx + rx + 20.0 * math.log10(self.wavelength) + rcs
                - FOUR_PI_CUBED_DB - 40.0 * math.log10(range_m))


@dataclass(frozen=True)
class RangeAxis:
    bin_count: int
    bin_width: float
    origin: float = 0.0

    def __post_init__(self) -> None:
        if self.bin_count <= 0:
            raise ValueError("bin_count must be positive")
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")

    @classmethod
    def for_config(cls, config: RadarConfig, bin_count: int | None = None,
                   origin: float = 0.0) -> "RangeAxis":
        """Axis at the configured range resolution.

        Without ``bin_count`` the axis just covers ``config.range_max``.
        """
        width = range_resolution(config)
        if bin_count is None:
            bin_count = int(math.floor((config.range_max - origin) / width)) + 1
        return cls(bin_count=bin_count, bin_width=width, origin=origin)

    @property
    def stop(self) -> float:
        return self.origin + self.bin_count * self.bin_width

    def centers(self) -> np.ndarray:
        return self.origin + np.arange(self.bin_count) * self.bin_width

    def bin_to_range(self, index: int) -> float:
        if not 0 <= index < self.bin_count:
            raise RangeAxisError(f"bin {index} outside [0, {self.bin_count})")
        return self.origin + index * self.bin_width


def range_resolution(config: RadarConfig) -> float:
    """c / 2B, in metres."""
    return SPEED_OF_LIGHT / (2.0 * config.bandwidth)


def beat_frequency(config: RadarConfig, range_m: float) -> float:
    """Beat frequency (Hz) of a stationary target at ``range_m``."""
    return 2.0 * range_m * config.chirp_slope / SPEED_OF_LIGHT


def echo_level(config: RadarConfig, rcs: float, range_m: float, tx_off_axis: float = 0.0,
               rx_off_axis: float = 0.0, rx_pol: str = "V") -> float:
    """Monostatic radar equation on the calibrated relative dB scale.

    ``rcs`` is in dBsm and may be ``-inf``; the off-axis angles are in degrees
    and go through the Gaussian mainlobe of :func:`isoscan.scene.antenna_gain`.
    """
    from .scene import antenna_gain

    if not range_m > 0:
        raise DomainError(f"range must be > 0, got {range_m}")
    g_tx = antenna_gain(config.tx_gain, config.tx_hpbw, tx_off_axis)
    g_rx = antenna_gain(config.rx_gain(rx_pol), config.rx_hpbw, rx_off_axis)
    return config._uncalibrated(rcs, range_m, g_tx, g_rx) - config.cal_offset


def range_to_bin(axis: RangeAxis, range_m: float) -> int:
    """Nearest bin, ties rounded up."""
    if not axis.origin <= range_m < axis.stop:
        raise RangeAxisError(f"range {range_m} m outside [{axis.origin}, {axis.stop}) m")
    index = int(math.floor((range_m - axis.origin) / axis.bin_width + 0.5))
    return min(index, axis.bin_count - 1)


def bin_to_range(axis: RangeAxis, index: int) -> float:
    return axis.bin_to_range(index)
