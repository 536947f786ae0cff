"""One simulated localization mission at 1 Hz.

Each second the UAV advances along its current action, every tag wanders,
each unlocalized tag's pulse is synthesized through the truth propagation
model and the tag's filter is predicted and updated. AoA actions collect the
rotation's pulses and emit a compensated bearing at the end of the turn.
The planner is consulted whenever an action finishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from rich.console import Console

from tagtrack.bearing.detectors import AoaConfig, measure_aoa
from tagtrack.bearing.rotation_log import RotationLog
from tagtrack.bernoulli.belief import (
    BernoulliBelief,
    ClutterModel,
    DynamicsModel,
    estimate,
    predict,
    resample,
    uniform_belief,
    update,
)
from tagtrack.bernoulli.likelihoods import MeasurementModel
from tagtrack.cli.scenario_config import ScenarioConfig
from tagtrack.errors import ConfigError, MissionComplete, NoMeasurementError
from tagtrack.planner.actions import ActionConfig, PlannedAction
from tagtrack.planner.planner import PlanDecision, PlannerConfig, plan
from tagtrack.planner.rewards import RewardSpec
from tagtrack.planner.void import VoidSpec, void_margin
from tagtrack.propagation.antenna import PATTERN_BUILDERS, GainPattern, load_pattern
from tagtrack.propagation.rssi import PropagationModel, RadioParams, draw_rssi_measurement
from tagtrack.scenario import baseline, kinematics
from tagtrack.scenario.baseline import pf_baseline_update
from tagtrack.scenario.kinematics import TAG_HEIGHT, fly_toward, step_object, step_uav
from tagtrack.scenario.state import SearchArea, TagTruth, UavState
from tagtrack.terrain.dem import TerrainGrid, elevation_at, load_dem_file, sample_elevations
from tagtrack.terrain.losses import VegetationSpec
from tagtrack.terrain.synthetic import generate_synthetic_terrain

console = Console()

RELAXED_N_TH = 2e6  # m^4, RSSI-only method on mountain terrain
NON_FLAT_SIGMA_SCALE = 2.0  # AoA+RSSI methods on hilly/mountain terrain

TRACE_COLUMNS = [
    "t", "uav_x", "uav_y", "uav_z", "uav_heading",
    "tag_id", "r", "mean_x", "mean_y", "det", "localized",
]


def set_quiet(quiet: bool = True) -> None:
    """Silence the simulation consoles (used by parallel Monte-Carlo workers)."""
    for c in (console, kinematics.console, baseline.console):
        c.quiet = quiet


# ── Method profiles ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class MethodProfile:
    name: str
    action_kinds: tuple[str, ...]
    rssi_updates: bool  # filter consumes travel-phase RSSI
    imprecise: bool
    sir_baseline: bool = False
    rotation: float | None = None  # overrides planner.rotation
    sigma_scale_non_flat: float = 1.0
    relaxed_n_th_on_mountain: bool = False


METHOD_PROFILES = {
    "metap": MethodProfile("metap", ("rssi", "aoa"), rssi_updates=True, imprecise=True),
    "imp_rssi": MethodProfile(
        "imp_rssi", ("rssi",), rssi_updates=True, imprecise=True, relaxed_n_th_on_mountain=True
    ),
    "caoa20": MethodProfile("caoa20", ("aoa",), rssi_updates=False, imprecise=True, rotation=20.0),
    "aoa_rssi_20": MethodProfile(
        "aoa_rssi_20", ("aoa",), rssi_updates=True, imprecise=False,
        rotation=20.0, sigma_scale_non_flat=NON_FLAT_SIGMA_SCALE,
    ),
    "aoa_rssi_45": MethodProfile(
        "aoa_rssi_45", ("aoa",), rssi_updates=True, imprecise=False,
        rotation=45.0, sigma_scale_non_flat=NON_FLAT_SIGMA_SCALE,
    ),
    "pf_baseline": MethodProfile(
        "pf_baseline", ("rssi", "aoa"), rssi_updates=True, imprecise=True, sir_baseline=True
    ),
}


# ── Results ───────────────────────────────────────────────────────────────────


@dataclass
class TagOutcome:
    tag_id: int
    localized: bool
    loc_time_s: float  # nan when never localized
    error_m: float  # x-y error at localization, or at mission end
    det_m4: float


@dataclass
class MissionResult:
    seed: int
    method: str
    terrain: str
    reward_kind: str
    tags: list[TagOutcome]
    total_time_s: float
    return_time_s: float = 0.0
    aoa_fraction: float = 0.0
    timed_out: bool = False
    diagnostics: dict[str, int] = field(default_factory=dict)
    void_margins: list[float] = field(default_factory=list)
    decisions: list[dict] = field(default_factory=list)
    trace: pd.DataFrame | None = None
    beliefs: list[BernoulliBelief] | None = None  # final particle clouds, kept with the trace

    @property
    def mean_error_m(self) -> float:
        errors = [t.error_m for t in self.tags if t.localized]
        return float(np.mean(errors)) if errors else math.nan


# ── Setup ─────────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class MissionSetup:
    """Everything derived from the config once per trial."""

    grid: TerrainGrid
    area: SearchArea
    profile: MethodProfile
    propagation: PropagationModel
    models: MeasurementModel
    dynamics: DynamicsModel
    planner: PlannerConfig
    aoa: AoaConfig
    rssi_clutter: ClutterModel
    aoa_clutter: ClutterModel
    n_th: float

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Uniform positions over the area at tag height above the terrain."""
        xs = rng.uniform(0.0, self.area.width, n)
        ys = rng.uniform(0.0, self.area.height, n)
        zs = sample_elevations(self.grid, xs, ys) + TAG_HEIGHT
        return np.column_stack([xs, ys, zs])


def build_terrain(config: ScenarioConfig) -> TerrainGrid:
    t = config.terrain
    if t.dem_path is not None:
        grid = load_dem_file(t.dem_path)
    else:
        grid = generate_synthetic_terrain(
            t.kind,
            (config.area.width, config.area.height),
            relief=t.relief,
            seed=t.seed,
            cell_size=t.cell_size,
        )
    min_x, min_y, max_x, max_y = grid.extent
    if min_x > 0 or min_y > 0 or max_x < config.area.width or max_y < config.area.height:
        raise ConfigError("terrain.dem_path", f"grid extent {grid.extent} does not cover the search area")
    return grid


def build_pattern(config: ScenarioConfig) -> GainPattern:
    a = config.antenna
    if a.pattern_path is not None:
        return load_pattern(a.pattern_path)
    return PATTERN_BUILDERS[a.kind](peak_gain=a.peak_gain, front_to_back=a.front_to_back)


def build_setup(config: ScenarioConfig) -> MissionSetup:
    profile = METHOD_PROFILES[config.mission.method]
    grid = build_terrain(config)
    area = SearchArea(config.area.width, config.area.height)
    r = config.radio
    radio = RadioParams(
        source_level=r.source_level,
        d0=r.d0,
        path_loss_exponent=r.path_loss_exponent,
        sigma=r.sigma_r,
        threshold=r.threshold,
        frequency_mhz=r.frequency_mhz,
    )
    propagation = PropagationModel(
        radio=radio,
        pattern=build_pattern(config),
        grid=grid,
        vegetation=VegetationSpec(depth=config.vegetation.depth, enabled=config.vegetation.enabled),
        terrain_effects=config.mission.terrain_effects,
    )

    f = config.filter
    sigma_scale = profile.sigma_scale_non_flat if config.terrain.kind != "flat" else 1.0
    models = MeasurementModel(
        propagation=propagation,
        sigma_r=r.sigma_r * sigma_scale,
        imprecision=f.imprecision if profile.imprecise else None,
        sigma_a=f.sigma_a,
    )

    p = config.planner
    rotation = profile.rotation if profile.rotation is not None else p.rotation
    actions = ActionConfig(
        n_headings=p.n_headings,
        horizon=p.travel_aoa + rotation,
        travel_aoa=p.travel_aoa,
        rotation=rotation,
        speed=config.uav.speed,
        max_rotation_rate=p.max_rotation_rate,
        kinds=profile.action_kinds,
    )
    planner = PlannerConfig(
        actions=actions,
        reward=RewardSpec(kind=p.reward, alpha=p.alpha),
        void=VoidSpec(radius=config.void.radius, threshold=config.void.threshold, enabled=config.void.enabled),
        rollout_seed=p.rollout_seed,
        use_rssi=profile.rssi_updates,
    )

    n_th = f.n_th
    if profile.relaxed_n_th_on_mountain and config.terrain.kind == "mountain":
        n_th = max(n_th, RELAXED_N_TH)

    setup = MissionSetup(
        grid=grid,
        area=area,
        profile=profile,
        propagation=propagation,
        models=models,
        dynamics=DynamicsModel(process_variance=f.process_variance, survival=f.survival, birth=f.birth),
        planner=planner,
        aoa=AoaConfig(k_min=f.k_min, threshold=f.aoa_threshold),
        rssi_clutter=ClutterModel.rssi(rate=f.clutter_rate, low=f.rssi_clutter_low, high=f.rssi_clutter_high),
        aoa_clutter=ClutterModel.aoa(rate=f.clutter_rate),
        n_th=n_th,
    )
    return replace(setup, dynamics=replace(setup.dynamics, birth_sampler=setup.sample_uniform))


def spawn_tags(config: ScenarioConfig, setup: MissionSetup, rng: np.random.Generator) -> list[TagTruth]:
    if config.tags.positions is not None:
        xy = np.array(config.tags.positions, dtype=float).reshape(-1, 2)
    else:
        xy = np.column_stack(
            [
                rng.uniform(0.0, config.area.width, config.tags.count),
                rng.uniform(0.0, config.area.height, config.tags.count),
            ]
        )
    tags = []
    for tag_id, (x, y) in enumerate(xy):
        z = elevation_at(setup.grid, x, y) + TAG_HEIGHT
        tags.append(TagTruth(tag_id=tag_id, x=float(x), y=float(y), z=z, mobility=config.tags.mobility))
    return tags


# ── Mission loop ──────────────────────────────────────────────────────────────


def _draw_scan(
    truth_level: float,
    setup: MissionSetup,
    forced_pd: float | None,
    rng: np.random.Generator,
) -> tuple[float | None, list[float]]:
    """One pulse slot: the true detection (or None) and the full measurement set."""
    radio = setup.propagation.radio
    if forced_pd is not None:
        detected = rng.random() < forced_pd
        value = float(rng.normal(truth_level, radio.sigma))
        true_value = value if detected else None
    else:
        true_value = draw_rssi_measurement(truth_level, radio, rng)

    scan = [] if true_value is None else [true_value]
    clutter = setup.rssi_clutter
    if rng.random() < min(1.0, clutter.rate):
        scan.append(float(rng.uniform(clutter.low, clutter.high)))
    return true_value, scan


def _aoa_scan(angle: float | None, setup: MissionSetup, rng: np.random.Generator) -> list[float]:
    scan = [] if angle is None else [angle]
    clutter = setup.aoa_clutter
    if rng.random() < min(1.0, clutter.rate):
        scan.append(float(rng.uniform(clutter.low, clutter.high)))
    return scan


def run_mission(config: ScenarioConfig, seed: int, trace: bool = False) -> MissionResult:
    """Simulate one mission; (config, seed) fully determines the result."""
    rng = np.random.default_rng(seed)
    setup = build_setup(config)
    profile = setup.profile
    f = config.filter

    tags = spawn_tags(config, setup, rng)
    sx, sy = config.uav.start
    home = (sx, sy)
    u = UavState(
        x=sx, y=sy, z=elevation_at(setup.grid, sx, sy) + config.uav.altitude, heading=config.uav.heading
    )

    initial_r = 1.0 if profile.sir_baseline else f.initial_r
    beliefs = [
        uniform_belief(tag.tag_id, setup.sample_uniform, rng, f.n_particles, r=initial_r) for tag in tags
    ]
    predict_dyn = setup.dynamics
    if profile.sir_baseline:
        predict_dyn = replace(setup.dynamics, survival=1.0, birth=0.0, birth_sampler=None)

    outcomes: dict[int, TagOutcome] = {}
    diagnostics = {"fallbacks": 0, "void_violations": 0, "r_clamps": 0, "aoa_misses": 0, "epochs": 0}
    decisions: list[dict] = []
    void_margins: list[float] = []
    trace_rows: list[dict] = []
    aoa_epochs = 0
    forced_pd = f.forced_pd

    def replan(now: float, at: UavState) -> PlanDecision | None:
        nonlocal aoa_epochs
        try:
            decision = plan(beliefs, at, setup.planner, setup.models, setup.dynamics, setup.area)
        except MissionComplete:
            return None
        diagnostics["epochs"] += 1
        diagnostics["fallbacks"] += int(decision.fallback)
        aoa_epochs += int(decision.action.kind == "aoa")
        decisions.append(decision.log_record(now, at))
        return decision

    t = 0
    decision = replan(0.0, u) if tags else None
    action: PlannedAction | None = decision.action if decision else None
    action_start = u
    action_t = 0
    rotation_buffers: dict[int, list[tuple[float, float]]] = {tag.tag_id: [] for tag in tags}

    while action is not None and t < config.mission.time_cap:
        t += 1
        action_t += 1
        u = step_uav(action_start, action, float(action_t), setup.area)
        in_travel = action.kind == "rssi" or action_t <= action.travel_duration
        action_done = action_t >= int(round(action.total_duration))

        tags = [step_object(tag, f.process_variance, rng, setup.grid, setup.area) for tag in tags]

        for i, tag in enumerate(tags):
            belief = beliefs[i]
            if belief.localized:
                continue
            belief = predict(belief, predict_dyn, rng)

            level = setup.propagation.truth_rssi(tag.position, u)
            true_value, scan = _draw_scan(level, setup, forced_pd, rng)
            if not in_travel and true_value is not None:
                rotation_buffers[tag.tag_id].append((true_value, u.heading))

            if profile.rssi_updates and in_travel:
                likelihood = setup.models.rssi_likelihood(u)
                if profile.sir_baseline:
                    belief = pf_baseline_update(belief, scan, likelihood, rng, setup.sample_uniform)
                else:
                    p_d = forced_pd if forced_pd is not None else setup.models.detection_probability(u)
                    belief = update(belief, scan, likelihood, p_d, setup.rssi_clutter)

            if action_done and action.kind == "aoa":
                belief = _aoa_update(belief, tag, rotation_buffers[tag.tag_id], action, u, t, setup, rng, diagnostics)

            if not profile.sir_baseline:
                belief = resample(belief, rng)

            summary = estimate(belief, setup.n_th)
            if summary.localized:
                belief.localized = True
                error = float(np.hypot(summary.mean[0] - tag.x, summary.mean[1] - tag.y))
                outcomes[tag.tag_id] = TagOutcome(tag.tag_id, True, float(t), error, summary.determinant)
            beliefs[i] = belief
            if trace:
                trace_rows.append(_trace_row(t, u, belief, summary))

        unlocalized = [b for b in beliefs if not b.localized]
        if setup.planner.void.enabled and unlocalized:
            margin = void_margin(unlocalized, [u], setup.planner.void)
            void_margins.append(margin)
            diagnostics["void_violations"] += int(margin <= 0)
        if not unlocalized:
            break

        if action_done:
            for buffer in rotation_buffers.values():
                buffer.clear()
            decision = replan(float(t), u)
            action = decision.action if decision else None
            action_start = u
            action_t = 0

    timed_out = any(not b.localized for b in beliefs)
    if timed_out:
        console.print(
            f"[yellow]⚠ Warning:[/yellow] seed {seed}: time cap {config.mission.time_cap:.0f} s hit "
            f"with {sum(not b.localized for b in beliefs)} tag(s) unlocalized"
        )

    for i, tag in enumerate(tags):
        if tag.tag_id not in outcomes:
            summary = estimate(beliefs[i], setup.n_th)
            error = float(np.hypot(summary.mean[0] - tag.x, summary.mean[1] - tag.y))
            outcomes[tag.tag_id] = TagOutcome(tag.tag_id, False, math.nan, error, summary.determinant)
    diagnostics["r_clamps"] = sum(b.r_clamps for b in beliefs)

    return_time = 0
    if config.mission.return_home and not timed_out:
        while (u.x, u.y) != home:
            u = fly_toward(u, home, config.uav.speed)
            return_time += 1

    return MissionResult(
        seed=seed,
        method=profile.name,
        terrain=config.terrain.kind,
        reward_kind=config.planner.reward,
        tags=[outcomes[k] for k in sorted(outcomes)],
        total_time_s=float(t),
        return_time_s=float(return_time),
        aoa_fraction=aoa_epochs / diagnostics["epochs"] if diagnostics["epochs"] else 0.0,
        timed_out=timed_out,
        diagnostics=diagnostics,
        void_margins=void_margins,
        decisions=decisions,
        trace=pd.DataFrame(trace_rows, columns=TRACE_COLUMNS) if trace else None,
        beliefs=beliefs if trace else None,
    )


def _aoa_update(
    belief: BernoulliBelief,
    tag: TagTruth,
    buffer: list[tuple[float, float]],
    action: PlannedAction,
    u: UavState,
    t: int,
    setup: MissionSetup,
    rng: np.random.Generator,
    diagnostics: dict[str, int],
) -> BernoulliBelief:
    """Turn the rotation's pulses into a compensated bearing and fold it in.

    A rotation with fewer than k_min detections yields no bearing; the filter
    then skips the AoA update.
    """
    log = RotationLog(
        rssi=[v for v, _ in buffer],
        headings=[h for _, h in buffer],
        duration=action.rotation_duration,
        expected_count=int(round(action.rotation_duration)),
        tag_id=tag.tag_id,
        timestamp=float(t),
    )
    try:
        angle = measure_aoa(log, setup.propagation.pattern, setup.aoa).angle
    except NoMeasurementError:
        diagnostics["aoa_misses"] += 1
        return belief

    scan = _aoa_scan(angle, setup, rng)
    likelihood = setup.models.aoa_likelihood(u)
    if setup.profile.sir_baseline:
        return pf_baseline_update(belief, scan, likelihood, rng, setup.sample_uniform)
    return update(belief, scan, likelihood, 1.0, setup.aoa_clutter)


def _trace_row(t: int, u: UavState, belief: BernoulliBelief, summary) -> dict:
    return {
        "t": t,
        "uav_x": u.x,
        "uav_y": u.y,
        "uav_z": u.z,
        "uav_heading": u.heading,
        "tag_id": belief.tag_id,
        "r": belief.r,
        "mean_x": float(summary.mean[0]),
        "mean_y": float(summary.mean[1]),
        "det": summary.determinant,
        "localized": belief.localized,
    }
