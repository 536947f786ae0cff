"""Raster elevation grid: ESRI-ASCII ingestion, serialization and bilinear lookup.

Elevations are stored in file order: row 0 is the northernmost row. Values
sit at cell centers, so the grid's interpolation domain spans the whole
extent with edge-constant behavior in the outer half cell.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

import numpy as np

from tagtrack.errors import DemParseError, OutOfExtentError

_REQUIRED_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize")
_NODATA_KEY = "nodata_value"
DEFAULT_NODATA = -9999.0


@dataclass(frozen=True, eq=False)
class TerrainGrid:
    n_cols: int
    n_rows: int
    cell_size: float
    origin: tuple[float, float]  # lower-left corner (x, y)
    elevations: np.ndarray  # shape (n_rows, n_cols), row 0 = north
    nodata: float = DEFAULT_NODATA

    def __post_init__(self) -> None:
        if self.n_cols < 2 or self.n_rows < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.n_cols}x{self.n_rows}")
        if not self.cell_size > 0:
            raise ValueError(f"cell_size must be positive, got {self.cell_size}")
        values = np.array(self.elevations, dtype=float)
        if values.shape != (self.n_rows, self.n_cols):
            raise ValueError(
                f"elevations shape {values.shape} does not match "
                f"({self.n_rows}, {self.n_cols})"
            )
        valid = values[values != self.nodata]
        if not np.all(np.isfinite(valid)):
            raise ValueError("non-nodata elevations must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "elevations", values)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """Return (min_x, min_y, max_x, max_y) in world coordinates."""
        x0, y0 = self.origin
        return (
            x0,
            y0,
            x0 + self.n_cols * self.cell_size,
            y0 + self.n_rows * self.cell_size,
        )

    @property
    def nodata_mask(self) -> np.ndarray:
        return self.elevations == self.nodata

    def contains(self, x: float, y: float) -> bool:
        min_x, min_y, max_x, max_y = self.extent
        return min_x <= x <= max_x and min_y <= y <= max_y


# ── ESRI ASCII ────────────────────────────────────────────────────────────────


def load_dem(text: str | TextIO) -> TerrainGrid:
    """Parse an ESRI-ASCII grid.

    Header keys are case-insensitive; NODATA_value is optional. Any
    malformed header entry, short/long row, or non-numeric cell raises
    DemParseError with the 1-based line number.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = text.splitlines()

    header: dict[str, float] = {}
    idx = 0
    while idx < len(lines):
        tokens = lines[idx].split()
        if not tokens:
            idx += 1
            continue
        if not tokens[0][0].isalpha():
            break
        key = tokens[0].lower()
        if key not in _REQUIRED_KEYS and key != _NODATA_KEY:
            raise DemParseError(f"unknown header key {tokens[0]!r}", idx + 1)
        if len(tokens) != 2:
            raise DemParseError(f"malformed header entry {lines[idx].strip()!r}", idx + 1)
        try:
            header[key] = float(tokens[1])
        except ValueError:
            raise DemParseError(f"non-numeric header value {tokens[1]!r}", idx + 1)
        idx += 1

    missing = [k for k in _REQUIRED_KEYS if k not in header]
    if missing:
        raise DemParseError(f"missing header keys: {', '.join(missing)}", idx + 1)

    n_cols = _as_count(header["ncols"], "ncols", idx)
    n_rows = _as_count(header["nrows"], "nrows", idx)
    nodata = header.get(_NODATA_KEY, DEFAULT_NODATA)

    rows: list[list[float]] = []
    for lineno in range(idx, len(lines)):
        tokens = lines[lineno].split()
        if not tokens:
            continue
        if len(rows) == n_rows:
            raise DemParseError(f"more than {n_rows} data rows", lineno + 1)
        if len(tokens) != n_cols:
            raise DemParseError(
                f"expected {n_cols} values, found {len(tokens)}", lineno + 1
            )
        try:
            row = [float(t) for t in tokens]
        except ValueError:
            bad = next(t for t in tokens if not _is_number(t))
            raise DemParseError(f"non-numeric cell {bad!r}", lineno + 1)
        if not all(np.isfinite(row)):
            raise DemParseError("non-finite cell value", lineno + 1)
        rows.append(row)

    if len(rows) != n_rows:
        raise DemParseError(
            f"expected {n_rows} data rows, found {len(rows)}", len(lines) + 1
        )

    try:
        return TerrainGrid(
            n_cols=n_cols,
            n_rows=n_rows,
            cell_size=header["cellsize"],
            origin=(header["xllcorner"], header["yllcorner"]),
            elevations=np.array(rows, dtype=float),
            nodata=nodata,
        )
    except ValueError as exc:
        raise DemParseError(str(exc), 1) from exc


def load_dem_file(path: str | Path) -> TerrainGrid:
    with open(path, encoding="utf-8") as fh:
        return load_dem(fh)


def serialize_dem(grid: TerrainGrid) -> str:
    """Write a grid back to ESRI ASCII; load_dem of the result is bit-identical."""
    x0, y0 = grid.origin
    lines = [
        f"ncols {grid.n_cols}",
        f"nrows {grid.n_rows}",
        f"xllcorner {float(x0)!r}",
        f"yllcorner {float(y0)!r}",
        f"cellsize {float(grid.cell_size)!r}",
        f"NODATA_value {float(grid.nodata)!r}",
    ]
    for row in grid.elevations.tolist():
        lines.append(" ".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def _as_count(value: float, key: str, line: int) -> int:
    if value != int(value) or value < 1:
        raise DemParseError(f"{key} must be a positive integer, got {value}", line)
    return int(value)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


# ── Lookup ────────────────────────────────────────────────────────────────────


def sample_elevations(grid: TerrainGrid, xs, ys) -> np.ndarray:
    """Vectorized bilinear elevation over cell centers.

    Raises OutOfExtentError if any point lies outside the grid extent or
    draws weight from a nodata cell.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    min_x, min_y, max_x, max_y = grid.extent
    outside = (xs < min_x) | (xs > max_x) | (ys < min_y) | (ys > max_y)
    if np.any(outside):
        first = np.flatnonzero(np.ravel(outside))[0]
        raise OutOfExtentError(
            f"point ({np.ravel(xs)[first]:.3f}, {np.ravel(ys)[first]:.3f}) "
            f"outside extent {grid.extent}"
        )

    cs = grid.cell_size
    fc = np.clip((xs - min_x) / cs - 0.5, 0.0, grid.n_cols - 1)
    fr = np.clip((grid.n_rows - 0.5) - (ys - min_y) / cs, 0.0, grid.n_rows - 1)
    c0 = np.minimum(np.floor(fc).astype(int), grid.n_cols - 2)
    r0 = np.minimum(np.floor(fr).astype(int), grid.n_rows - 2)
    dc = fc - c0
    dr = fr - r0

    e = grid.elevations
    corners = (
        (e[r0, c0], (1 - dr) * (1 - dc)),
        (e[r0, c0 + 1], (1 - dr) * dc),
        (e[r0 + 1, c0], dr * (1 - dc)),
        (e[r0 + 1, c0 + 1], dr * dc),
    )
    for value, weight in corners:
        if np.any((value == grid.nodata) & (weight > 0)):
            raise OutOfExtentError("interpolation neighborhood contains nodata")

    return sum(np.where(weight > 0, value, 0.0) * weight for value, weight in corners)


def elevation_at(grid: TerrainGrid, x: float, y: float) -> float:
    """Bilinear elevation at (x, y); exact at cell centers."""
    return float(sample_elevations(grid, x, y))
