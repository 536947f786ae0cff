"""Rotation AoA detectors.

Both detectors scan a grid of candidate offsets alpha and score how well
the logged RSSI matches the gain pattern evaluated at (heading + alpha).
measure_aoa feeds them negated headings so that the winning alpha is the
absolute compass bearing to the tag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tagtrack.bearing.rotation_log import RotationLog
from tagtrack.errors import NoMeasurementError
from tagtrack.propagation.antenna import GainPattern, gain_db
from tagtrack.scenario.state import circular_distance, wrap_angle

DEFAULT_GRID_STEP_DEG = 1.0


@dataclass(frozen=True)
class AoaConfig:
    k_min: int = 8
    threshold: float = np.pi / 2  # z_A_Th, radians
    grid_step_deg: float = DEFAULT_GRID_STEP_DEG

    def __post_init__(self) -> None:
        if self.k_min < 2:
            raise ValueError(f"k_min must be >= 2, got {self.k_min}")
        if not 0 < self.threshold <= np.pi:
            raise ValueError(f"threshold must lie in (0, pi], got {self.threshold}")
        if self.grid_step_deg <= 0:
            raise ValueError(f"grid step must be positive, got {self.grid_step_deg}")


@dataclass(frozen=True)
class AoaMeasurement:
    tag_id: int
    angle: float  # absolute bearing, radians in [0, 2*pi)
    detection_fraction: float
    timestamp: float
    flipped: bool = False  # compensation replaced the correlation estimate


def mirror_headings(log: RotationLog) -> RotationLog:
    """Copy of log with negated headings.

    Pulses follow z = G(bearing - heading), so scanning G(-heading + alpha)
    lands alpha on the absolute bearing.
    """
    return RotationLog(
        rssi=log.rssi,
        headings=-log.headings,
        duration=log.duration,
        expected_count=log.expected_count,
        tag_id=log.tag_id,
        timestamp=log.timestamp,
    )


def alpha_grid(step_deg: float = DEFAULT_GRID_STEP_DEG) -> np.ndarray:
    return np.deg2rad(np.arange(0.0, 360.0, step_deg))


def _pattern_matrix(log: RotationLog, pattern: GainPattern, alphas: np.ndarray) -> np.ndarray:
    """Gain in dB, shape (n_alpha, n_detections)."""
    return gain_db(pattern, alphas[:, None] + log.headings[None, :])


def corr_coef_aoa(log: RotationLog, pattern: GainPattern, alphas: np.ndarray | None = None) -> float:
    """Alpha maximizing the Pearson correlation between RSSI (dB) and the pattern."""
    if alphas is None:
        alphas = alpha_grid()
    if log.count < 2:
        raise NoMeasurementError(f"correlation detector needs >= 2 detections, got {log.count}")
    z = log.rssi - log.rssi.mean()
    z_norm = float(np.linalg.norm(z))
    if z_norm == 0:
        raise NoMeasurementError("RSSI is constant over the rotation")

    gains = _pattern_matrix(log, pattern, alphas)
    centered = gains - gains.mean(axis=1, keepdims=True)
    g_norm = np.linalg.norm(centered, axis=1)
    score = np.full(len(alphas), -np.inf)
    ok = g_norm > 0
    if not np.any(ok):
        raise NoMeasurementError("gain pattern is flat over the logged headings")
    score[ok] = (centered[ok] @ z) / (g_norm[ok] * z_norm)
    return float(alphas[int(np.argmax(score))])


def cross_corr_aoa(log: RotationLog, pattern: GainPattern, alphas: np.ndarray | None = None) -> float:
    """Alpha maximizing the linear-power dot product of RSSI and pattern gain."""
    if alphas is None:
        alphas = alpha_grid()
    if log.count < 1:
        raise NoMeasurementError("cross-correlation detector needs at least one detection")
    # Referencing to the strongest pulse keeps linear powers well scaled
    power = 10.0 ** ((log.rssi - log.rssi.max()) / 10.0)
    gains = 10.0 ** (_pattern_matrix(log, pattern, alphas) / 10.0)
    return float(alphas[int(np.argmax(gains @ power))])


def compensated_aoa(z1: float, z2: float, threshold: float = np.pi / 2) -> float:
    """Keep z1 when both detectors agree within threshold, else flip it by pi."""
    if circular_distance(z1, z2) < threshold:
        return float(wrap_angle(z1))
    return float(wrap_angle(z1 - np.pi))


def measure_aoa(log: RotationLog, pattern: GainPattern, config: AoaConfig = AoaConfig()) -> AoaMeasurement:
    """Compensated bearing from one rotation.

    Raises NoMeasurementError when fewer than k_min pulses were detected;
    callers treat that as a missed AoA.
    """
    if log.count < config.k_min:
        raise NoMeasurementError(f"{log.count} detections < k_min={config.k_min}")

    mirrored = mirror_headings(log)
    alphas = alpha_grid(config.grid_step_deg)
    z1 = corr_coef_aoa(mirrored, pattern, alphas)
    z2 = cross_corr_aoa(mirrored, pattern, alphas)
    angle = compensated_aoa(z1, z2, config.threshold)
    return AoaMeasurement(
        tag_id=log.tag_id,
        angle=angle,
        detection_fraction=log.detection_fraction,
        timestamp=log.timestamp,
        flipped=angle != z1,
    )
