"""RSSI synthesis: log-distance model with antenna gain, terrain/vegetation
losses, noisy thresholded draws and the analytic detection probability."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from tagtrack.errors import GeometryError
from tagtrack.propagation.antenna import GainPattern, default_pattern, gain_db
from tagtrack.scenario.state import UavState, wrap_angle
from tagtrack.terrain.dem import TerrainGrid
from tagtrack.terrain.losses import (
    VegetationSpec,
    los_profile,
    terrain_diffraction_loss,
    vegetation_loss,
)

MIN_ELEVATION_ANGLE_DEG = 0.1


@dataclass(frozen=True)
class RadioParams:
    source_level: float = 40.0  # dBm at d0
    d0: float = 1.0  # meters
    path_loss_exponent: float = 4.0
    sigma: float = 4.0  # dB
    threshold: float = -120.0  # dBm
    frequency_mhz: float = 150.0

    def __post_init__(self) -> None:
        if self.d0 <= 0:
            raise ValueError(f"d0 must be positive, got {self.d0}")
        if self.path_loss_exponent <= 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.path_loss_exponent}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.frequency_mhz <= 0:
            raise ValueError(f"frequency must be positive, got {self.frequency_mhz}")

    @property
    def frequency_ghz(self) -> float:
        return self.frequency_mhz / 1000.0


@dataclass(frozen=True)
class RssiMeasurement:
    tag_id: int
    value: float  # dBm
    timestamp: float
    uav: UavState


def relative_azimuth(x, u: UavState):
    """Azimuth of x seen from u, in the antenna frame, wrapped to [0, 2*pi).

    Accepts one position (3,) or a cloud (N, 3).
    """
    pts = np.asarray(x, dtype=float)
    dx = pts[..., 0] - u.x
    dy = pts[..., 1] - u.y
    if np.any((dx == 0) & (dy == 0)):
        raise GeometryError("tag and UAV are horizontally coincident; bearing undefined")
    return wrap_angle(np.arctan2(dx, dy) - u.heading)


def absolute_bearing(x, u: UavState):
    """Compass bearing from u to x (clockwise from north), wrapped to [0, 2*pi)."""
    return relative_azimuth(x, u.with_heading(0.0))


def slant_distance(x, u: UavState):
    pts = np.asarray(x, dtype=float)
    d = np.linalg.norm(pts - u.position, axis=-1)
    if np.any(d <= 0):
        raise GeometryError("tag and UAV coincide; distance is zero")
    return d if np.ndim(d) else float(d)


def ideal_rssi(x, u: UavState, p: RadioParams, g: GainPattern):
    """Log-distance RSSI plus antenna gain, vectorized over positions."""
    d = slant_distance(x, u)
    zeta = relative_azimuth(x, u)
    return p.source_level - 10.0 * p.path_loss_exponent * np.log10(d / p.d0) + gain_db(g, zeta)


def elevation_angle_deg(x, u: UavState) -> float:
    pts = np.asarray(x, dtype=float)
    horizontal = float(np.hypot(pts[0] - u.x, pts[1] - u.y))
    dz = abs(u.z - pts[2])
    phi = float(np.degrees(np.arctan2(dz, horizontal)))
    return max(phi, MIN_ELEVATION_ANGLE_DEG)


def complex_rssi(
    x,
    u: UavState,
    p: RadioParams,
    g: GainPattern,
    grid: TerrainGrid,
    veg: VegetationSpec,
) -> float:
    """Ideal RSSI minus vegetation and terrain-diffraction losses for one tag."""
    base = ideal_rssi(x, u, p, g)
    veg_loss = vegetation_loss(p.frequency_mhz, veg.effective_depth, elevation_angle_deg(x, u))
    profile = los_profile(grid, tuple(np.asarray(x, dtype=float)), tuple(u.position))
    diffraction = terrain_diffraction_loss(profile, p.frequency_ghz)
    return float(base - veg_loss - diffraction)


def draw_rssi_measurement(truth: float, p: RadioParams, rng: np.random.Generator) -> float | None:
    """One noisy pulse reading; None when it falls below the receiver threshold."""
    value = float(rng.normal(truth, p.sigma))
    if value < p.threshold:
        return None
    return value


def detection_probability_from_level(h, p: RadioParams):
    """P(noisy reading >= threshold) for noiseless level(s) h."""
    return ndtr((np.asarray(h, dtype=float) - p.threshold) / p.sigma)


def detection_probability(
    x,
    u: UavState,
    p: RadioParams,
    g: GainPattern,
    grid: TerrainGrid | None = None,
    veg: VegetationSpec | None = None,
):
    """Analytic pass rate of the receiver threshold.

    Uses the complex model when a grid is supplied, the ideal one otherwise.
    """
    if grid is not None:
        h = complex_rssi(x, u, p, g, grid, veg or VegetationSpec(enabled=False))
    else:
        h = ideal_rssi(x, u, p, g)
    prob = detection_probability_from_level(h, p)
    return prob if np.ndim(prob) else float(prob)


@dataclass(frozen=True, eq=False)
class PropagationModel:
    """The truth-side and filter-side RSSI models of one scenario.

    The truth model includes terrain and vegetation losses when
    `terrain_effects` is on; the filter always predicts with the ideal model.
    """

    radio: RadioParams = field(default_factory=RadioParams)
    pattern: GainPattern = field(default_factory=default_pattern)
    grid: TerrainGrid | None = None
    vegetation: VegetationSpec = field(default_factory=VegetationSpec)
    terrain_effects: bool = True

    def truth_rssi(self, x, u: UavState) -> float:
        if self.terrain_effects and self.grid is not None:
            return complex_rssi(x, u, self.radio, self.pattern, self.grid, self.vegetation)
        return float(ideal_rssi(x, u, self.radio, self.pattern))

    def filter_rssi(self, points, u: UavState) -> np.ndarray:
        return ideal_rssi(points, u, self.radio, self.pattern)

    def filter_detection_probability(self, points, u: UavState) -> np.ndarray:
        return detection_probability_from_level(self.filter_rssi(points, u), self.radio)
