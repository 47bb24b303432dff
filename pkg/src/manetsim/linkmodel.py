"""Physical link existence from node distance via a log-distance SNR threshold.

The default threshold is calibrated so the SNR predicate coincides with the
unit-disk rule (link up iff distance <= range_m), keeping scenario design in
meters.  The boundary is closed: distance exactly at range is up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum


@dataclass(frozen=True)
class RadioConfig:
    range_m: float = 50.0
    ref_snr_db: float = 60.0        # received SNR at 1 m
    pathloss_exp: float = 2.0
    snr_threshold_db: float | None = None  # None = calibrate to range_m
    short_fraction: float = 0.5     # short/long split as a fraction of range

    def __post_init__(self):
        if self.range_m <= 0:
            raise ValueError("range must be > 0")
        if self.pathloss_exp < 2:
            raise ValueError("path-loss exponent must be >= 2")
        if not 0 < self.short_fraction < 1:
            raise ValueError("short_fraction must be in (0, 1)")

    @property
    def threshold_db(self) -> float:
        if self.snr_threshold_db is not None:
            return self.snr_threshold_db
        return snr_db(self.range_m, self)

    @property
    def effective_range_m(self) -> float:
        """Distance at which the SNR predicate flips; equals range_m when calibrated."""
        if self.snr_threshold_db is None:
            return self.range_m
        if self.snr_threshold_db > self.ref_snr_db:
            return 0.0
        d = 10.0 ** ((self.ref_snr_db - self.snr_threshold_db) / (10.0 * self.pathloss_exp))
        return max(1.0, d)


class LinkLength(Enum):
    SHORT = "short"
    LONG = "long"


def snr_db(distance: float, cfg: RadioConfig) -> float:
    """Log-distance path loss; flat inside 1 m, strictly decreasing beyond."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    return cfg.ref_snr_db - 10.0 * cfg.pathloss_exp * math.log10(max(distance, 1.0))


def phys_link_up(pos_a: tuple[float, float], pos_b: tuple[float, float],
                 cfg: RadioConfig) -> bool:
    return snr_db(math.dist(pos_a, pos_b), cfg) >= cfg.threshold_db


def classify_length(distance: float, cfg: RadioConfig) -> LinkLength:
    if distance > cfg.range_m:
        raise ValueError(f"no link at distance {distance} m (range {cfg.range_m} m)")
    if distance <= cfg.short_fraction * cfg.range_m:
        return LinkLength.SHORT
    return LinkLength.LONG
