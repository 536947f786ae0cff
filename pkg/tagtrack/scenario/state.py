"""Observer and tag state types shared by the propagation, filter and mission code."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(angle):
    """Wrap radians into [0, 2*pi)."""
    # np.mod returns exactly 2*pi for tiny negative inputs
    wrapped = np.mod(angle, TWO_PI)
    wrapped = np.where(wrapped >= TWO_PI, 0.0, wrapped)
    return wrapped if np.ndim(angle) else float(wrapped)


def circular_distance(a, b):
    """Smallest absolute angular difference, in [0, pi]."""
    diff = np.abs(np.mod(np.asarray(a) - np.asarray(b) + np.pi, TWO_PI) - np.pi)
    return diff if np.ndim(diff) else float(diff)


@dataclass(frozen=True)
class UavState:
    x: float
    y: float
    z: float
    heading: float  # radians clockwise from north

    def __post_init__(self) -> None:
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def with_heading(self, heading: float) -> "UavState":
        return replace(self, heading=heading)


@dataclass(frozen=True)
class TagTruth:
    tag_id: int
    x: float
    y: float
    z: float
    mobility: str = "wandering"  # "static" | "wandering"

    @property
    def position(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class SearchArea:
    """Axis-aligned rectangle [0, width] x [0, height] in meters."""

    width: float
    height: float

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"search area must have positive size, got {self.width}x{self.height}")

    def contains(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height

    def clip(self, x: float, y: float) -> tuple[float, float]:
        return float(np.clip(x, 0.0, self.width)), float(np.clip(y, 0.0, self.height))
