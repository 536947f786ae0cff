"""Discrete action space: straight RSSI legs and travel-then-rotate AoA legs.

Every action lasts exactly the planning horizon, so RSSI and AoA rewards are
scored over the same amount of simulated time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tagtrack.scenario.state import TWO_PI, SearchArea, UavState

ACTION_KINDS = ("rssi", "aoa")


@dataclass(frozen=True)
class ActionConfig:
    n_headings: int = 8
    horizon: float = 30.0  # T_P
    travel_aoa: float = 10.0  # T_R1
    rotation: float = 20.0  # T_R2
    speed: float = 10.0  # v_max, m/s
    max_rotation_rate: float = np.pi / 3  # rad/s
    kinds: tuple[str, ...] = ACTION_KINDS

    def __post_init__(self) -> None:
        if self.n_headings < 2:
            raise ValueError(f"n_headings must be >= 2, got {self.n_headings}")
        if self.travel_aoa < 0 or self.rotation <= 0:
            raise ValueError("AoA travel must be >= 0 and rotation time > 0")
        if not np.isclose(self.horizon, self.travel_aoa + self.rotation):
            raise ValueError(
                f"horizon ({self.horizon}) must equal travel_aoa + rotation "
                f"({self.travel_aoa} + {self.rotation})"
            )
        if self.speed <= 0 or self.max_rotation_rate <= 0:
            raise ValueError("speed and max_rotation_rate must be positive")
        unknown = set(self.kinds) - set(ACTION_KINDS)
        if unknown or not self.kinds:
            raise ValueError(f"kinds must be a non-empty subset of {ACTION_KINDS}, got {self.kinds}")

    @property
    def rotation_rate(self) -> float:
        """One full turn over the rotation phase, capped at the platform limit."""
        return min(self.max_rotation_rate, TWO_PI / self.rotation)


@dataclass(frozen=True)
class PlannedAction:
    index: int
    kind: str  # "rssi" | "aoa"
    heading: float  # xi, radians
    travel_duration: float
    rotation_duration: float
    speed: float
    rotation_rate: float = 0.0
    hover: bool = False  # fallback when every heading leaves the area

    @property
    def total_duration(self) -> float:
        return self.travel_duration + self.rotation_duration

    @property
    def travel_distance(self) -> float:
        return self.speed * self.travel_duration


def headings(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def travel_endpoint(u: UavState, heading: float, distance: float) -> tuple[float, float]:
    return u.x + distance * np.sin(heading), u.y + distance * np.cos(heading)


def enumerate_actions(
    u: UavState, config: ActionConfig, area: SearchArea | None = None
) -> list[PlannedAction]:
    """All headings for each enabled kind; legs ending outside the area are dropped.

    Indices run 0..n-1 for RSSI and n..2n-1 for AoA and survive pruning, so
    they double as the tie-break order. A cornered UAV gets one hover action.
    """
    candidates: list[PlannedAction] = []
    for k, xi in enumerate(headings(config.n_headings)):
        if "rssi" in config.kinds:
            candidates.append(
                PlannedAction(
                    index=k,
                    kind="rssi",
                    heading=float(xi),
                    travel_duration=config.horizon,
                    rotation_duration=0.0,
                    speed=config.speed,
                )
            )
        if "aoa" in config.kinds:
            candidates.append(
                PlannedAction(
                    index=config.n_headings + k,
                    kind="aoa",
                    heading=float(xi),
                    travel_duration=config.travel_aoa,
                    rotation_duration=config.rotation,
                    speed=config.speed,
                    rotation_rate=config.rotation_rate,
                )
            )
    candidates.sort(key=lambda a: a.index)

    if area is not None:
        # The area is convex, so an inside endpoint means the whole leg is inside
        candidates = [
            a for a in candidates if area.contains(*travel_endpoint(u, a.heading, a.travel_distance))
        ]
    if candidates:
        return candidates
    return [hover_action(u, config)]


def hover_action(u: UavState, config: ActionConfig) -> PlannedAction:
    if "aoa" in config.kinds:
        return PlannedAction(
            index=2 * config.n_headings,
            kind="aoa",
            heading=u.heading,
            travel_duration=config.travel_aoa,
            rotation_duration=config.rotation,
            speed=0.0,
            rotation_rate=config.rotation_rate,
            hover=True,
        )
    return PlannedAction(
        index=2 * config.n_headings,
        kind="rssi",
        heading=u.heading,
        travel_duration=config.horizon,
        rotation_duration=0.0,
        speed=0.0,
        hover=True,
    )
