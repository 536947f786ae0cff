import numpy as np
import pytest

from tagtrack.bernoulli.belief import BernoulliBelief, DynamicsModel, estimate
from tagtrack.bernoulli.likelihoods import MeasurementModel
from tagtrack.errors import MissionComplete
from tagtrack.planner.actions import ActionConfig, PlannedAction, enumerate_actions, headings
from tagtrack.planner.planner import PlannerConfig, closest_unlocalized, pims_rollout, plan
from tagtrack.planner.rewards import (
    REWARD_CAP,
    HistogramGrid,
    RewardSpec,
    binary_entropy,
    cs_reward,
    renyi_reward,
    reward,
    shannon_reward,
)
from tagtrack.planner.void import VoidSpec, check_void_constraint, void_margin, void_probability
from tagtrack.propagation.rssi import PropagationModel
from tagtrack.scenario.state import TWO_PI, SearchArea, UavState, circular_distance
from tests.conftest import point_belief, uniform_cloud

AREA = SearchArea(2000.0, 2000.0)
GRID = HistogramGrid(2000.0, 2000.0)
STATIC = DynamicsModel(process_variance=(0.0, 0.0, 0.0), survival=1.0, birth=0.0)


@pytest.fixture
def models():
    return MeasurementModel(PropagationModel(grid=None))


def diffuse_belief(tag_id=0, n=1500, seed=0, r=0.5, width=2000.0, height=2000.0) -> BernoulliBelief:
    cloud = uniform_cloud(np.random.default_rng(seed), n, width, height)
    return BernoulliBelief(tag_id=tag_id, r=r, particles=cloud, weights=np.full(n, 1.0 / n))


def reweighted(belief: BernoulliBelief, weights, r=None) -> BernoulliBelief:
    out = belief.copy()
    out.weights = np.asarray(weights, dtype=float) / np.sum(weights)
    if r is not None:
        out.r = r
    return out


# ── actions ───────────────────────────────────────────────────────────────────


def test_full_action_set_at_center():
    actions = enumerate_actions(UavState(1000.0, 1000.0, 80.0, 0.0), ActionConfig(), AREA)
    assert len(actions) == 16
    assert [a.index for a in actions] == list(range(16))
    assert sum(a.kind == "rssi" for a in actions) == 8


def test_corner_prunes_actions():
    actions = enumerate_actions(UavState(1.0, 1.0, 80.0, 0.0), ActionConfig(), AREA)
    assert 0 < len(actions) < 16
    for a in actions:
        assert 0 <= a.heading <= np.pi / 2 + 1e-9


def test_headings_are_uniform():
    h = headings(8)
    np.testing.assert_allclose(np.diff(h), TWO_PI / 8)
    assert h[0] == 0.0


def test_every_action_spans_the_horizon():
    config = ActionConfig()
    for a in enumerate_actions(UavState(1000.0, 1000.0, 80.0, 0.0), config, AREA):
        assert a.total_duration == config.horizon
        if a.kind == "aoa":
            assert a.travel_duration == 10.0 and a.rotation_duration == 20.0


def test_cornered_uav_hovers():
    tiny = SearchArea(50.0, 50.0)
    actions = enumerate_actions(UavState(25.0, 25.0, 80.0, 1.0), ActionConfig(), tiny)
    assert len(actions) == 1
    hover = actions[0]
    assert hover.hover and hover.kind == "aoa" and hover.speed == 0.0
    assert hover.index == 16
    assert hover.total_duration == 30.0


def test_action_config_validation():
    with pytest.raises(ValueError, match="horizon"):
        ActionConfig(horizon=30.0, travel_aoa=10.0, rotation=45.0)
    with pytest.raises(ValueError):
        ActionConfig(n_headings=1)
    with pytest.raises(ValueError):
        ActionConfig(kinds=("rssi", "lidar"))


def test_rotation_rate_is_one_turn_capped():
    assert ActionConfig().rotation_rate == pytest.approx(TWO_PI / 20.0)
    fast = ActionConfig(horizon=13.0, travel_aoa=10.0, rotation=3.0)
    assert fast.rotation_rate == pytest.approx(np.pi / 3)


def test_restricted_kinds():
    only_aoa = enumerate_actions(UavState(1000.0, 1000.0, 80.0, 0.0), ActionConfig(kinds=("aoa",)), AREA)
    assert len(only_aoa) == 8
    assert all(a.kind == "aoa" and a.index >= 8 for a in only_aoa)


# ── void constraint ───────────────────────────────────────────────────────────


def test_void_probability_cases():
    u = UavState(100.0, 100.0, 80.0, 0.0)
    inside = point_belief(0, [110.0, 100.0, 0.2])
    assert void_probability(point_belief(0, [110.0, 100.0, 0.2], r=0.0), u, 50.0) == 1.0
    assert void_probability(inside, u, 50.0) == 0.0
    half = BernoulliBelief(
        tag_id=0,
        r=1.0,
        particles=np.array([[110.0, 100.0, 0.2], [900.0, 900.0, 0.2]]),
        weights=np.array([0.5, 0.5]),
    )
    assert void_probability(half, u, 50.0) == pytest.approx(0.5)


def test_void_probability_ignores_altitude():
    u = UavState(0.0, 0.0, 500.0, 0.0)
    assert void_probability(point_belief(0, [10.0, 0.0, 0.0]), u, 50.0) == 0.0


def test_void_constraint_pass_and_fail():
    void = VoidSpec()
    path = [UavState(100.0 + 10 * k, 100.0, 80.0, 0.0) for k in range(10)]
    assert check_void_constraint([point_belief(0, [1500.0, 1500.0, 0.2])], path, void)
    assert not check_void_constraint([point_belief(0, [150.0, 100.0, 0.2])], path, void)
    assert check_void_constraint([point_belief(0, [150.0, 100.0, 0.2])], path, VoidSpec(enabled=False))


def test_void_margin_without_beliefs():
    assert void_margin([], [UavState(0, 0, 80, 0)], VoidSpec()) == pytest.approx(0.05)


def test_void_spec_defaults_and_validation():
    void = VoidSpec()
    assert void.radius == 50.0 and void.threshold == 0.95
    with pytest.raises(ValueError):
        VoidSpec(radius=0.0)
    with pytest.raises(ValueError):
        VoidSpec(threshold=1.5)


# ── closest belief ────────────────────────────────────────────────────────────


def test_closest_unlocalized():
    u = UavState(0.0, 0.0, 0.2, 0.0)
    near = point_belief(4, [100.0, 0.0, 0.2])
    far = point_belief(1, [500.0, 0.0, 0.2])
    assert closest_unlocalized([near], u) is near
    assert closest_unlocalized([far, near], u) is near
    near.localized = True
    assert closest_unlocalized([far, near], u) is far


def test_closest_unlocalized_tie_prefers_lower_id():
    u = UavState(0.0, 0.0, 0.2, 0.0)
    a = point_belief(7, [100.0, 0.0, 0.2])
    b = point_belief(2, [0.0, 100.0, 0.2])
    assert closest_unlocalized([a, b], u).tag_id == 2


def test_closest_unlocalized_all_done():
    b = point_belief(0, [1.0, 1.0, 0.2])
    b.localized = True
    with pytest.raises(MissionComplete):
        closest_unlocalized([b], UavState(0, 0, 80, 0))


# ── rewards ───────────────────────────────────────────────────────────────────


@pytest.mark.parametrize("kind", ["renyi", "shannon", "cs"])
def test_reward_identity_is_zero(kind):
    prior = diffuse_belief(n=500)
    assert reward(prior, prior.copy(), RewardSpec(kind=kind), GRID) == pytest.approx(0.0, abs=1e-9)


def test_renyi_non_negative_on_random_reweightings():
    rng = np.random.default_rng(1)
    prior = diffuse_belief(n=200)
    for _ in range(1000):
        post = reweighted(prior, rng.exponential(1.0, 200) ** 3, r=float(rng.uniform(0.01, 0.99)))
        value = renyi_reward(prior, post, 0.1)
        assert value >= -1e-12
        assert np.isfinite(value)


def test_renyi_rejects_alpha_one():
    prior = diffuse_belief(n=50)
    with pytest.raises(ValueError):
        renyi_reward(prior, prior, 1.0)
    with pytest.raises(ValueError):
        RewardSpec(kind="renyi", alpha=1.0)


def test_renyi_grows_with_concentration():
    prior = diffuse_belief(n=1000)
    d = np.hypot(prior.particles[:, 0] - 1000.0, prior.particles[:, 1] - 1000.0)
    mild = reweighted(prior, np.exp(-0.5 * (d / 800.0) ** 2))
    sharp = reweighted(prior, np.exp(-0.5 * (d / 200.0) ** 2))
    assert 0 < renyi_reward(prior, mild) < renyi_reward(prior, sharp)


def test_shannon_existence_only_change():
    cell = HistogramGrid(2000.0, 2000.0, cell=1.0)
    prior = point_belief(0, [500.5, 500.5, 0.2], r=0.5)
    post = prior.copy()
    post.r = 0.9
    value = shannon_reward(prior, post, cell)
    assert value == pytest.approx(binary_entropy(0.5) - binary_entropy(0.9))
    assert value > 0


def test_shannon_concentration_is_positive():
    prior = diffuse_belief(n=2000, r=0.7)
    d = np.hypot(prior.particles[:, 0] - 600.0, prior.particles[:, 1] - 900.0)
    post = reweighted(prior, np.exp(-0.5 * (d / 150.0) ** 2))
    assert shannon_reward(prior, post, GRID) > 0


def test_cs_symmetric():
    prior = diffuse_belief(n=1000, r=0.4)
    d = np.hypot(prior.particles[:, 0] - 300.0, prior.particles[:, 1] - 300.0)
    post = reweighted(prior, np.exp(-0.5 * (d / 300.0) ** 2), r=0.8)
    assert cs_reward(prior, post, GRID) == pytest.approx(cs_reward(post, prior, GRID))
    assert cs_reward(prior, post, GRID) > 0


def test_cs_disjoint_is_capped():
    particles = np.array([[100.0, 100.0, 0.2], [1900.0, 1900.0, 0.2]])
    prior = BernoulliBelief(tag_id=0, r=1.0, particles=particles, weights=np.array([1.0, 0.0]))
    post = BernoulliBelief(tag_id=0, r=1.0, particles=particles, weights=np.array([0.0, 1.0]))
    assert cs_reward(prior, post, GRID) == REWARD_CAP


def test_reward_scale_invariance():
    prior = diffuse_belief(n=800)
    d = np.hypot(prior.particles[:, 0] - 1200.0, prior.particles[:, 1] - 400.0)
    post = reweighted(prior, np.exp(-0.5 * (d / 250.0) ** 2))
    scaled = post.copy()
    scaled.weights = scaled.weights * 37.0
    for kind in ("renyi", "shannon", "cs"):
        spec = RewardSpec(kind=kind)
        assert reward(prior, scaled, spec, GRID) == pytest.approx(reward(prior, post, spec, GRID))


def test_reward_needs_shared_support():
    with pytest.raises(ValueError, match="support"):
        renyi_reward(diffuse_belief(n=10), diffuse_belief(n=20))


# ── PIMS rollout ──────────────────────────────────────────────────────────────


def _rssi_action(heading=0.0) -> PlannedAction:
    return PlannedAction(index=0, kind="rssi", heading=heading, travel_duration=30.0, rotation_duration=0.0, speed=10.0)


def _aoa_action(heading=0.0) -> PlannedAction:
    return PlannedAction(
        index=8, kind="aoa", heading=heading, travel_duration=10.0, rotation_duration=20.0,
        speed=10.0, rotation_rate=TWO_PI / 20.0,
    )


def test_rollout_point_mass_learns_nothing(models):
    belief = point_belief(0, [800.0, 900.0, 0.2], n=100, r=1.0)
    u = UavState(500.0, 500.0, 80.0, 0.0)
    out = pims_rollout(belief, u, _rssi_action(), models, STATIC, np.random.default_rng(0))
    np.testing.assert_allclose(out.posterior.weights, out.prior.weights)
    assert len(out.trajectory) == 30
    assert out.violated_at is None


def test_rollout_aoa_shrinks_diffuse_belief(models):
    belief = diffuse_belief(n=2000)
    u = UavState(1000.0, 200.0, 80.0, 0.0)
    out = pims_rollout(belief, u, _aoa_action(), models, DynamicsModel(), np.random.default_rng(1))
    assert estimate(out.posterior).determinant < estimate(out.prior).determinant
    np.testing.assert_array_equal(out.posterior.particles, out.prior.particles)


def test_rollout_never_mutates_live_belief(models):
    belief = diffuse_belief(n=500)
    snapshot = (belief.r, belief.particles.copy(), belief.weights.copy())
    pims_rollout(belief, UavState(1000.0, 1000.0, 80.0, 0.0), _aoa_action(1.0), models, DynamicsModel(), np.random.default_rng(2))
    assert belief.r == snapshot[0]
    np.testing.assert_array_equal(belief.particles, snapshot[1])
    np.testing.assert_array_equal(belief.weights, snapshot[2])


def test_rollout_stops_at_first_void_violation(models):
    u = UavState(500.0, 500.0, 80.0, 0.0)
    blocker = point_belief(1, [500.0, 620.0, 0.2])
    out = pims_rollout(
        diffuse_belief(n=300), u, _rssi_action(0.0), models, STATIC, np.random.default_rng(3),
        void=VoidSpec(), others=[blocker],
    )
    # reaches 50 m of the blocker after 8 s of northward travel
    assert out.violated_at == 8.0
    assert len(out.trajectory) == 8
    assert out.void_margin == pytest.approx(-0.95)


def test_rollout_without_rssi_uses_only_bearing(models):
    belief = diffuse_belief(n=500)
    u = UavState(1000.0, 1000.0, 80.0, 0.0)
    out = pims_rollout(belief, u, _rssi_action(), models, STATIC, np.random.default_rng(4), use_rssi=False)
    np.testing.assert_allclose(out.posterior.weights, out.prior.weights / out.prior.weights.sum())


# ── plan ──────────────────────────────────────────────────────────────────────


def test_plan_is_deterministic_and_consistent(models):
    beliefs = [diffuse_belief(0, n=400, seed=1), diffuse_belief(1, n=400, seed=2)]
    u = UavState(600.0, 400.0, 80.0, 0.0)
    config = PlannerConfig()
    a = plan(beliefs, u, config, models, DynamicsModel(), AREA)
    b = plan(beliefs, u, config, models, DynamicsModel(), AREA)
    assert a.action.index == b.action.index
    assert a.rewards == b.rewards
    assert a.action.total_duration == config.actions.horizon
    if not a.fallback:
        best = max(a.rewards.values())
        assert a.action.index == min(k for k, v in a.rewards.items() if v == best)
        assert a.action.index not in a.void_pruned


def test_plan_falls_back_when_void_saturates(models):
    u = UavState(1000.0, 1000.0, 80.0, 0.0)
    straddling = point_belief(0, [1001.0, 1001.0, 0.2])
    decision = plan([straddling], u, PlannerConfig(), models, STATIC, AREA)
    assert decision.fallback
    assert sorted(decision.void_pruned) == list(range(16))
    assert all(v == 0.0 for v in decision.rewards.values())
    assert decision.action.index == 0


def test_plan_targets_closest_unlocalized(models):
    near = point_belief(5, [1100.0, 1000.0, 0.2], r=0.5)
    near.particles[:, 0] += np.linspace(-300, 300, near.n_particles)
    far = point_belief(2, [1900.0, 1900.0, 0.2], r=0.5)
    decision = plan([far, near], UavState(1000.0, 700.0, 80.0, 0.0), PlannerConfig(), models, STATIC, AREA)
    assert decision.target_tag == 5


@pytest.mark.parametrize("start", [(300.0, 300.0), (1000.0, 300.0), (300.0, 1000.0)])
def test_plan_flies_rssi_leg_toward_distant_belief(models, start):
    rng = np.random.default_rng(0)
    cloud = np.column_stack([rng.normal(1500.0, 200.0, (1000, 2)), np.full(1000, 0.2)])
    belief = BernoulliBelief(tag_id=0, r=0.5, particles=cloud, weights=np.full(1000, 1.0 / 1000))
    u = UavState(start[0], start[1], 80.0, 0.0)
    decision = plan([belief], u, PlannerConfig(), models, STATIC, AREA)
    bearing = np.arctan2(1500.0 - start[0], 1500.0 - start[1])
    assert not decision.fallback
    assert decision.action.kind == "rssi"
    assert circular_distance(decision.action.heading, bearing) <= np.pi / 4 + 1e-9


def test_plan_with_all_localized_signals_completion(models):
    done = point_belief(0, [10.0, 10.0, 0.2])
    done.localized = True
    with pytest.raises(MissionComplete):
        plan([done], UavState(500.0, 500.0, 80.0, 0.0), PlannerConfig(), models, STATIC, AREA)


def test_decision_log_record_is_json_ready(models):
    import json

    u = UavState(1000.0, 1000.0, 80.0, 0.0)
    decision = plan([diffuse_belief(n=200)], u, PlannerConfig(), models, STATIC, AREA)
    record = json.loads(json.dumps(decision.log_record(30.0, u)))
    assert record["chosen"] == decision.action.index
    assert set(record["rewards"]) == {str(k) for k in decision.rewards}
    assert record["target_tag"] == 0
