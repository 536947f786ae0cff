"""Void constraint: keep a probabilistic stand-off cylinder around the UAV."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from tagtrack.bernoulli.belief import BernoulliBelief
from tagtrack.scenario.state import UavState


@dataclass(frozen=True)
class VoidSpec:
    radius: float = 50.0  # iota_min, meters
    threshold: float = 0.95  # P_vmin
    enabled: bool = True

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"void radius must be positive, got {self.radius}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"void threshold must lie in [0, 1], got {self.threshold}")


def void_probability(belief: BernoulliBelief, u: UavState, radius: float) -> float:
    """Probability that the tag is outside the vertical cylinder around u."""
    dx = belief.particles[:, 0] - u.x
    dy = belief.particles[:, 1] - u.y
    inside = dx * dx + dy * dy < radius * radius
    w = belief.weights / belief.weights.sum()
    mass_inside = float(w[inside].sum())
    return (1.0 - belief.r) + belief.r * (1.0 - mass_inside)


def void_margin(
    beliefs: Iterable[BernoulliBelief], trajectory: Sequence[UavState], void: VoidSpec
) -> float:
    """min over states and beliefs of (void probability - P_vmin).

    Positive means the constraint holds; with nothing in scope the margin is
    1 - P_vmin.
    """
    worst = 1.0
    for belief in beliefs:
        for u in trajectory:
            worst = min(worst, void_probability(belief, u, void.radius))
    return worst - void.threshold


def check_void_constraint(
    beliefs: Iterable[BernoulliBelief], trajectory: Sequence[UavState], void: VoidSpec
) -> bool:
    if not void.enabled:
        return True
    return void_margin(beliefs, trajectory, void) > 0.0

