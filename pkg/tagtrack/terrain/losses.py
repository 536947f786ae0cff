"""Environment-dependent signal losses: vegetation attenuation and single knife-edge
terrain diffraction along a sampled line-of-sight profile."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tagtrack.errors import GeometryError
from tagtrack.terrain.dem import TerrainGrid, sample_elevations
from tagtrack.terrain.presets import DEFAULT_VEGETATION_DEPTH

DEFAULT_PROFILE_SAMPLES = 256

# Normalized obstructions within this distance of the maximum count as ties
_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LosProfile:
    distances: np.ndarray  # meters along the path, 0 .. total_distance
    terrain: np.ndarray  # terrain elevation under each sample
    path: np.ndarray  # straight-line path elevation at each sample
    total_distance: float

    @property
    def samples(self) -> list[tuple[float, float, float]]:
        return list(zip(self.distances.tolist(), self.terrain.tolist(), self.path.tolist()))

    @property
    def penetration(self) -> np.ndarray:
        """Terrain minus path; positive where terrain pokes through the line."""
        return self.terrain - self.path


@dataclass(frozen=True)
class VegetationSpec:
    depth: float = DEFAULT_VEGETATION_DEPTH  # L_v, meters
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.depth < 0:
            raise ValueError(f"vegetation depth must be >= 0, got {self.depth}")

    @property
    def effective_depth(self) -> float:
        return self.depth if self.enabled else 0.0


def los_profile(
    grid: TerrainGrid,
    tx: tuple[float, float, float],
    rx: tuple[float, float, float],
    n_samples: int = DEFAULT_PROFILE_SAMPLES,
) -> LosProfile:
    """Sample the straight 3-D line tx -> rx uniformly in along-path distance."""
    if n_samples < 3:
        raise ValueError(f"n_samples must be >= 3, got {n_samples}")
    tx_arr = np.asarray(tx, dtype=float)
    rx_arr = np.asarray(rx, dtype=float)
    total = float(np.linalg.norm(rx_arr - tx_arr))
    if total <= 0:
        raise GeometryError("transmitter and receiver coincide")

    t = np.linspace(0.0, 1.0, n_samples)
    xs = tx_arr[0] + t * (rx_arr[0] - tx_arr[0])
    ys = tx_arr[1] + t * (rx_arr[1] - tx_arr[1])
    path = tx_arr[2] + t * (rx_arr[2] - tx_arr[2])
    path[0], path[-1] = tx_arr[2], rx_arr[2]
    terrain = sample_elevations(grid, xs, ys)
    return LosProfile(distances=t * total, terrain=terrain, path=path, total_distance=total)


def fresnel_radius(d1, d2, d, f):
    """First Fresnel zone radius in meters (distances in km, frequency in GHz)."""
    return 17.3 * np.sqrt(np.asarray(d1) * np.asarray(d2) / (np.asarray(f) * np.asarray(d)))


def most_significant_blockage(profile: LosProfile, f: float) -> tuple[int, float]:
    """Index and normalized penetration p/F1 of the dominant obstruction.

    Endpoints are excluded (F1 vanishes there). Ties go to the sample
    nearest the path midpoint.
    """
    interior = slice(1, len(profile.distances) - 1)
    dist_km = profile.distances[interior] / 1000.0
    total_km = profile.total_distance / 1000.0
    f1 = fresnel_radius(dist_km, total_km - dist_km, total_km, f)
    ratio = profile.penetration[interior] / f1

    best = float(ratio.max())
    candidates = np.flatnonzero(ratio >= best - _TIE_TOLERANCE)
    midpoint_offset = np.abs(dist_km[candidates] - total_km / 2.0)
    pick = int(candidates[np.argmin(midpoint_offset)])
    return pick + 1, float(ratio[pick])


def terrain_diffraction_loss(profile: LosProfile, f: float) -> float:
    """Diffraction loss in dB: max(0, 20 p/F1 + 10) at the dominant blockage."""
    _, normalized = most_significant_blockage(profile, f)
    return max(0.0, 20.0 * normalized + 10.0)


def vegetation_loss(f: float, L_v: float, phi: float) -> float:
    """Woodland attenuation in dB (f in MHz, depth in m, elevation angle in degrees)."""
    if L_v <= 0:
        return 0.0
    return 0.25 * f**0.39 * L_v**0.25 * phi**0.05
