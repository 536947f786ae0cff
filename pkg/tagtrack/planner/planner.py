"""Myopic measurement and trajectory planner.

Each epoch the planner focuses on the unlocalized belief closest to the UAV,
rolls every candidate action forward with predicted ideal measurements
(noiseless, clutter-free, P_D = 1), screens the simulated trajectory against
the void constraint second by second and returns the highest-reward action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from tagtrack.bernoulli.belief import BernoulliBelief, ClutterModel, DynamicsModel, predict, update
from tagtrack.bernoulli.likelihoods import MeasurementModel
from tagtrack.errors import MissionComplete
from tagtrack.planner.actions import ActionConfig, PlannedAction, enumerate_actions
from tagtrack.planner.rewards import HistogramGrid, RewardSpec, reward
from tagtrack.planner.void import VoidSpec, void_margin
from tagtrack.propagation.rssi import absolute_bearing
from tagtrack.scenario.kinematics import step_uav
from tagtrack.scenario.state import SearchArea, UavState

ROLLOUT_STEP = 1.0  # seconds
_NO_CLUTTER = ClutterModel(rate=0.0)


@dataclass(frozen=True)
class PlannerConfig:
    actions: ActionConfig = field(default_factory=ActionConfig)
    reward: RewardSpec = field(default_factory=RewardSpec)
    void: VoidSpec = field(default_factory=VoidSpec)
    rollout_seed: int = 0
    use_rssi: bool = True  # filter consumes travel-phase RSSI


@dataclass(frozen=True, eq=False)
class Rollout:
    prior: BernoulliBelief  # measurement-free prediction at the horizon
    posterior: BernoulliBelief  # PIMS-updated belief at the horizon
    trajectory: list[UavState]
    void_margin: float  # min over simulated seconds; inf when screening is off
    violated_at: float | None = None  # seconds into the action


@dataclass(frozen=True, eq=False)
class PlanDecision:
    action: PlannedAction
    target_tag: int
    rewards: dict[int, float]
    margins: dict[int, float]
    void_pruned: list[int]
    fallback: bool = False

    def log_record(self, time: float, u: UavState) -> dict:
        """One JSON-serializable decision-log entry."""
        return {
            "time": time,
            "uav": [u.x, u.y, u.z, u.heading],
            "target_tag": self.target_tag,
            "rewards": {str(k): v for k, v in self.rewards.items()},
            "void_pruned": self.void_pruned,
            "chosen": self.action.index,
            "kind": self.action.kind,
            "hover": self.action.hover,
            "fallback": self.fallback,
        }


def weighted_mean(belief: BernoulliBelief) -> np.ndarray:
    return (belief.weights / belief.weights.sum()) @ belief.particles


def closest_unlocalized(beliefs: Sequence[BernoulliBelief], u: UavState) -> BernoulliBelief:
    """Unlocalized belief whose mean is nearest to the UAV in 3-D; ties go to the lower tag id."""
    candidates = [b for b in beliefs if not b.localized]
    if not candidates:
        raise MissionComplete("every tag is localized")
    return min(
        candidates,
        key=lambda b: (float(np.linalg.norm(weighted_mean(b) - u.position)), b.tag_id),
    )


def pims_rollout(
    belief: BernoulliBelief,
    u: UavState,
    action: PlannedAction,
    models: MeasurementModel,
    dynamics: DynamicsModel,
    rng: np.random.Generator,
    void: VoidSpec | None = None,
    others: Sequence[BernoulliBelief] = (),
    dt: float = ROLLOUT_STEP,
    use_rssi: bool = True,
) -> Rollout:
    """Simulate `action` on a copy of `belief` with predicted ideal measurements.

    Every dt seconds the belief is predicted (survival only, no births), the
    ideal RSSI at the current mean is generated while the UAV travels, and an
    ideal AoA closes an AoA action. The measurement-free prior shares the
    posterior's particles so the rewards can use shared-support estimators.
    Screening stops at the first second that breaks the void constraint.
    """
    rollout_dyn = replace(dynamics, birth=0.0, birth_sampler=None)
    posterior = belief.copy()
    prior = belief.copy()
    trajectory: list[UavState] = []
    screen = void is not None and void.enabled
    margin = float("inf")
    n_steps = int(round(action.total_duration / dt))

    for i in range(1, n_steps + 1):
        elapsed = i * dt
        u_i = step_uav(u, action, elapsed)
        trajectory.append(u_i)
        x_bar = weighted_mean(posterior)

        posterior = predict(posterior, rollout_dyn, rng)
        prior = replace(
            prior,
            r=rollout_dyn.survival * prior.r,
            particles=posterior.particles,
            weights=prior.weights.copy(),
        )

        in_travel = action.kind == "rssi" or elapsed <= action.travel_duration + 1e-9
        if use_rssi and in_travel:
            z = float(models.predicted_rssi(x_bar, u_i))
            posterior = update(posterior, [z], models.rssi_likelihood(u_i), 1.0, _NO_CLUTTER)
        if action.kind == "aoa" and i == n_steps:
            z_a = float(absolute_bearing(x_bar, u_i))
            posterior = update(posterior, [z_a], models.aoa_likelihood(u_i), 1.0, _NO_CLUTTER)

        if screen:
            step_margin = void_margin([posterior, *others], [u_i], void)
            margin = min(margin, step_margin)
            if step_margin <= 0:
                return Rollout(prior, posterior, trajectory, margin, violated_at=elapsed)

    return Rollout(prior, posterior, trajectory, margin)


def plan(
    beliefs: Sequence[BernoulliBelief],
    u: UavState,
    config: PlannerConfig,
    models: MeasurementModel,
    dynamics: DynamicsModel,
    area: SearchArea,
) -> PlanDecision:
    """Pick the next action for the closest unlocalized tag.

    Void-violating actions score 0. Ties go to the lower action index. When
    every action scores 0 the action with the largest worst-case void margin
    is returned and the decision is flagged as a fallback.
    """
    target = closest_unlocalized(beliefs, u)
    others = [b for b in beliefs if not b.localized and b.tag_id != target.tag_id]
    grid = HistogramGrid(area.width, area.height)
    actions = enumerate_actions(u, config.actions, area)

    rewards: dict[int, float] = {}
    margins: dict[int, float] = {}
    pruned: list[int] = []
    for action in actions:
        # Common random numbers: every action sees the same diffusion draws
        rng = np.random.default_rng(config.rollout_seed)
        rollout = pims_rollout(
            target, u, action, models, dynamics, rng,
            void=config.void, others=others, use_rssi=config.use_rssi,
        )
        margins[action.index] = rollout.void_margin
        if rollout.violated_at is not None:
            pruned.append(action.index)
            rewards[action.index] = 0.0
            continue
        rewards[action.index] = float(reward(rollout.prior, rollout.posterior, config.reward, grid))

    best = max(actions, key=lambda a: (rewards[a.index], -a.index))
    if rewards[best.index] > 0:
        return PlanDecision(best, target.tag_id, rewards, margins, pruned)

    safest = max(actions, key=lambda a: (margins[a.index], -a.index))
    return PlanDecision(safest, target.tag_id, rewards, margins, pruned, fallback=True)
