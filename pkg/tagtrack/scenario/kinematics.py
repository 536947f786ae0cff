"""UAV action kinematics and the wandering tag model."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
from rich.console import Console

from tagtrack.planner.actions import PlannedAction
from tagtrack.scenario.state import SearchArea, TagTruth, UavState
from tagtrack.terrain.dem import TerrainGrid, elevation_at

console = Console()

TAG_HEIGHT = 0.2  # meters above ground
WANDER_VARIANCE = (2.5, 2.5, 0.0025)  # m^2 per 1 s step


def step_uav(
    u: UavState,
    action: PlannedAction,
    elapsed: float,
    area: SearchArea | None = None,
) -> UavState:
    """UAV state `elapsed` seconds into `action`, starting from `u`.

    Travel phase: straight line along the action heading at the action speed.
    Rotation phase: position fixed, heading advancing at the action's rate.
    Altitude never changes.
    """
    if elapsed < 0 or elapsed > action.total_duration + 1e-9:
        raise ValueError(
            f"elapsed {elapsed} s outside action duration {action.total_duration} s"
        )
    t_travel = min(elapsed, action.travel_duration)
    distance = action.speed * t_travel
    x = u.x + distance * np.sin(action.heading)
    y = u.y + distance * np.cos(action.heading)
    heading = action.heading if action.speed > 0 else u.heading

    t_rot = max(0.0, elapsed - action.travel_duration)
    heading = heading + action.rotation_rate * t_rot

    if area is not None and not area.contains(x, y):
        console.print(
            f"[yellow]⚠ Warning:[/yellow] action {action.index} leaves the search area; "
            f"clipping ({x:.1f}, {y:.1f}) to the boundary"
        )
        x, y = area.clip(x, y)
    return UavState(x=float(x), y=float(y), z=u.z, heading=heading)


def fly_toward(u: UavState, target: tuple[float, float], speed: float, dt: float = 1.0) -> UavState:
    """One straight step toward target at `speed`; lands on it when within reach."""
    dx, dy = target[0] - u.x, target[1] - u.y
    dist = float(np.hypot(dx, dy))
    if dist <= speed * dt:
        return replace(u, x=float(target[0]), y=float(target[1]))
    scale = speed * dt / dist
    return UavState(x=u.x + dx * scale, y=u.y + dy * scale, z=u.z, heading=np.arctan2(dx, dy))


def step_object(
    tag: TagTruth,
    variance,
    rng: np.random.Generator,
    grid: TerrainGrid | None = None,
    area: SearchArea | None = None,
) -> TagTruth:
    """Wandering step x' ~ N(x, diag(variance)); static tags do not move.

    The tag stays inside the area and its height is re-clamped to
    terrain + 0.2 m when a grid is given.
    """
    if tag.mobility == "static":
        return tag
    std = np.sqrt(np.asarray(variance, dtype=float))
    moved = tag.position + rng.normal(0.0, 1.0, 3) * std
    x, y, z = (float(v) for v in moved)
    if area is not None:
        x, y = area.clip(x, y)
    if grid is not None:
        z = elevation_at(grid, x, y) + TAG_HEIGHT
    return replace(tag, x=x, y=y, z=z)
