"""Directional antenna gain patterns, tabulated in relative azimuth."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tagtrack.scenario.state import TWO_PI

DEFAULT_PEAK_GAIN_DB = 4.0
DEFAULT_FRONT_TO_BACK_DB = 10.0
# Side nulls bottom out this far (dB) below the front-lobe peak
_NULL_DEPTH_DB = 20.0


@dataclass(frozen=True, eq=False)
class GainPattern:
    angles: np.ndarray  # radians, strictly increasing, in [0, 2*pi)
    gains: np.ndarray  # dB

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles, dtype=float)
        gains = np.asarray(self.gains, dtype=float)
        if angles.ndim != 1 or angles.shape != gains.shape or len(angles) < 2:
            raise ValueError("gain pattern needs matching 1-D angle and gain tables of length >= 2")
        if np.any(angles < 0) or np.any(angles >= TWO_PI):
            raise ValueError("pattern angles must lie in [0, 2*pi)")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("pattern angles must be strictly increasing")
        if not np.all(np.isfinite(gains)):
            raise ValueError("pattern gains must be finite")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "gains", gains)


def gain_db(pattern: GainPattern, zeta):
    """Linear interpolation of the gain table, wrapping across the 0/2*pi seam."""
    value = np.interp(zeta, pattern.angles, pattern.gains, period=TWO_PI)
    return value if np.ndim(value) else float(value)


def default_pattern(
    peak_gain: float = DEFAULT_PEAK_GAIN_DB,
    front_to_back: float = DEFAULT_FRONT_TO_BACK_DB,
    resolution_deg: float = 1.0,
) -> GainPattern:
    """Cardioid pattern peak - (F2B / 2) * (1 - cos zeta), tabulated in degrees.

    Monotone from the front peak to the back minimum, with no side nulls.
    """
    angles = np.deg2rad(np.arange(0.0, 360.0, resolution_deg))
    gains = peak_gain - 0.5 * front_to_back * (1.0 - np.cos(angles))
    return GainPattern(angles=angles, gains=gains)


def two_lobe_pattern(
    peak_gain: float = DEFAULT_PEAK_GAIN_DB,
    front_to_back: float = DEFAULT_FRONT_TO_BACK_DB,
    resolution_deg: float = 1.0,
) -> GainPattern:
    """H-antenna-like pattern with a front and a back lobe of the same shape.

    Front lobe cos^2 around zeta=0, back lobe the same shape scaled down by
    the front-to-back ratio around zeta=pi, side nulls floored at
    peak - 20 dB. In dB the back lobe is the front lobe shifted down, so a
    Pearson match over front-lobe pulses alone cannot tell them apart.
    """
    angles = np.deg2rad(np.arange(0.0, 360.0, resolution_deg))
    cos2 = np.cos(angles) ** 2
    back_scale = 10.0 ** (-front_to_back / 10.0)
    lobe = np.where(np.cos(angles) >= 0, cos2, back_scale * cos2)
    floor = 10.0 ** (-_NULL_DEPTH_DB / 10.0)
    gains = peak_gain + 10.0 * np.log10(np.maximum(lobe, floor))
    return GainPattern(angles=angles, gains=gains)


PATTERN_BUILDERS = {"cardioid": default_pattern, "two_lobe": two_lobe_pattern}


def load_pattern(source: str | Path) -> GainPattern:
    """Read a two-column (degrees, dB) table; '#' starts a comment."""
    with open(source, encoding="utf-8") as fh:
        return parse_pattern(fh.read())


def parse_pattern(text: str) -> GainPattern:
    rows: list[tuple[float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ValueError(f"line {lineno}: expected 'degrees gain_db', got {raw.strip()!r}")
        try:
            rows.append((float(tokens[0]), float(tokens[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric entry {raw.strip()!r}")

    table = np.array(rows, dtype=float).reshape(-1, 2)
    angles = np.mod(np.deg2rad(table[:, 0]), TWO_PI)
    order = np.argsort(angles, kind="stable")
    return GainPattern(angles=angles[order], gains=table[order, 1])
