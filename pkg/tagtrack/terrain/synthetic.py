"""Seeded synthetic terrain standing in for real DEM tiles.

Flat terrain is low-amplitude smoothed noise. Hilly and mountain terrain are
a sum of Gaussian ridges with random orientation over the search area,
plus a little smoothed noise, rescaled so max - min equals the requested
relief exactly.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from config.settings import VALID_TERRAIN_KINDS
from tagtrack.terrain.dem import TerrainGrid
from tagtrack.terrain.presets import TERRAIN_PRESETS

DEFAULT_CELL_SIZE = 10.0
DEFAULT_MARGIN = 20.0
_NOISE_SCALE_M = 250.0


def generate_synthetic_terrain(
    kind: str,
    extent: float | tuple[float, float],
    relief: float | None = None,
    seed: int = 0,
    cell_size: float = DEFAULT_CELL_SIZE,
    margin: float = DEFAULT_MARGIN,
) -> TerrainGrid:
    """Build a deterministic terrain grid covering [0, w] x [0, h] plus margin.

    `extent` is either the side of a square search area or (width, height).
    `relief` defaults to the preset for `kind`.
    """
    if kind not in VALID_TERRAIN_KINDS:
        raise ValueError(f"unknown terrain kind {kind!r}; expected one of {sorted(VALID_TERRAIN_KINDS)}")
    width, height = _as_extent(extent)
    preset = TERRAIN_PRESETS[kind]
    if relief is None:
        relief = preset["relief"]
    if relief < 0:
        raise ValueError(f"relief must be >= 0, got {relief}")
    if cell_size <= 0 or margin < 0:
        raise ValueError("cell_size must be positive and margin non-negative")

    n_cols = max(2, int(np.ceil((width + 2 * margin) / cell_size)))
    n_rows = max(2, int(np.ceil((height + 2 * margin) / cell_size)))
    origin = (-margin, -margin)

    rng = np.random.default_rng(seed)
    xs = origin[0] + (np.arange(n_cols) + 0.5) * cell_size
    ys = origin[1] + (n_rows - np.arange(n_rows) - 0.5) * cell_size
    grid_x, grid_y = np.meshgrid(xs, ys)

    noise = _smooth_noise(rng, (n_rows, n_cols), _NOISE_SCALE_M / cell_size)
    if preset["ridges"] == 0:
        field = noise
    else:
        field = _ridge_field(rng, grid_x, grid_y, width, height, preset) + 0.1 * noise

    elevations = _normalize(field) * relief + preset["base_elevation"]
    return TerrainGrid(
        n_cols=n_cols,
        n_rows=n_rows,
        cell_size=float(cell_size),
        origin=origin,
        elevations=elevations,
    )


def _as_extent(extent: float | tuple[float, float]) -> tuple[float, float]:
    if np.isscalar(extent):
        width = height = float(extent)
    else:
        width, height = (float(v) for v in extent)
    if width <= 0 or height <= 0:
        raise ValueError(f"extent must be positive, got {extent}")
    return width, height


def _smooth_noise(rng: np.random.Generator, shape: tuple[int, int], sigma_cells: float) -> np.ndarray:
    raw = rng.standard_normal(shape)
    return gaussian_filter(raw, sigma=max(1.0, sigma_cells), mode="reflect")


def _ridge_field(
    rng: np.random.Generator,
    grid_x: np.ndarray,
    grid_y: np.ndarray,
    width: float,
    height: float,
    preset: dict,
) -> np.ndarray:
    field = np.zeros_like(grid_x)
    w_lo, w_hi = preset["ridge_half_width"]
    l_lo, l_hi = preset["ridge_length"]
    for _ in range(preset["ridges"]):
        cx = rng.uniform(0.0, width)
        cy = rng.uniform(0.0, height)
        angle = rng.uniform(0.0, np.pi)
        half_width = rng.uniform(w_lo, w_hi)
        length = rng.uniform(l_lo, l_hi)
        peak = rng.uniform(0.5, 1.0)

        ux, uy = np.cos(angle), np.sin(angle)
        along = (grid_x - cx) * ux + (grid_y - cy) * uy
        across = -(grid_x - cx) * uy + (grid_y - cy) * ux
        field += peak * np.exp(-0.5 * (across / half_width) ** 2 - 0.5 * (along / length) ** 2)
    return field


def _normalize(field: np.ndarray) -> np.ndarray:
    lo, hi = float(field.min()), float(field.max())
    if hi - lo <= 0:
        return np.zeros_like(field)
    return (field - lo) / (hi - lo)
