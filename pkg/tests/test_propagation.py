import numpy as np
import pytest
from scipy.special import ndtr

from tagtrack.errors import GeometryError
from tagtrack.propagation.antenna import GainPattern, gain_db, parse_pattern
from tagtrack.propagation.rssi import (
    PropagationModel,
    RadioParams,
    complex_rssi,
    detection_probability,
    detection_probability_from_level,
    draw_rssi_measurement,
    ideal_rssi,
    relative_azimuth,
)
from tagtrack.scenario.state import TWO_PI, UavState
from tagtrack.terrain.losses import VegetationSpec
from tests.conftest import constant_grid
from tests.test_terrain import ridge_grid

ISOTROPIC = GainPattern(angles=np.array([0.0, np.pi]), gains=np.array([0.0, 0.0]))


# ── geometry ──────────────────────────────────────────────────────────────────


def test_relative_azimuth_frames():
    north = np.array([0.0, 100.0, 0.0])
    east = np.array([100.0, 0.0, 0.0])
    assert relative_azimuth(north, UavState(0, 0, 80, 0.0)) == pytest.approx(0.0)
    assert relative_azimuth(north, UavState(0, 0, 80, np.pi / 2)) == pytest.approx(3 * np.pi / 2)
    assert relative_azimuth(east, UavState(0, 0, 80, 0.0)) == pytest.approx(np.pi / 2)


def test_relative_azimuth_vectorized():
    pts = np.array([[0.0, 10.0, 0.0], [10.0, 0.0, 0.0], [0.0, -10.0, 0.0]])
    np.testing.assert_allclose(relative_azimuth(pts, UavState(0, 0, 50, 0.0)), [0.0, np.pi / 2, np.pi])


def test_relative_azimuth_coincident():
    with pytest.raises(GeometryError):
        relative_azimuth([5.0, 5.0, 0.0], UavState(5.0, 5.0, 80.0, 0.0))


# ── gain pattern ──────────────────────────────────────────────────────────────


def test_gain_at_knot(pattern):
    assert gain_db(pattern, pattern.angles[37]) == pytest.approx(pattern.gains[37])


def test_default_pattern_front_to_back(pattern):
    assert gain_db(pattern, 0.0) - gain_db(pattern, np.pi) == pytest.approx(10.0)
    assert gain_db(pattern, 0.0) == pytest.approx(4.0)


def test_default_pattern_is_a_cardioid(pattern):
    assert gain_db(pattern, np.pi / 2) == pytest.approx(-1.0)
    assert gain_db(pattern, 3 * np.pi / 2) == pytest.approx(-1.0)
    front_half = pattern.gains[: len(pattern.gains) // 2 + 1]
    assert np.all(np.diff(front_half) <= 0)


def test_two_lobe_back_lobe_mirrors_front(two_lobe):
    assert gain_db(two_lobe, 0.0) - gain_db(two_lobe, np.pi) == pytest.approx(10.0)
    zeta = np.deg2rad(np.arange(-60.0, 61.0, 5.0))
    np.testing.assert_allclose(gain_db(two_lobe, zeta + np.pi), gain_db(two_lobe, zeta) - 10.0, atol=1e-9)
    assert gain_db(two_lobe, np.pi / 2) == pytest.approx(4.0 - 20.0)


def test_gain_periodic_and_wraps_seam(pattern):
    assert gain_db(pattern, 1.2) == pytest.approx(gain_db(pattern, 1.2 + TWO_PI))
    between = gain_db(pattern, np.deg2rad(359.5))
    assert between == pytest.approx(0.5 * (pattern.gains[-1] + pattern.gains[0]))


def test_parse_pattern_table():
    p = parse_pattern("# deg dB\n0 3\n90, -7\n180 -5\n270 -7\n")
    assert gain_db(p, np.pi / 4) == pytest.approx(-2.0)
    with pytest.raises(ValueError, match="line 2"):
        parse_pattern("0 1\n90\n")


def test_pattern_rejects_unsorted_angles():
    with pytest.raises(ValueError):
        GainPattern(angles=np.array([1.0, 0.5]), gains=np.array([0.0, 0.0]))


# ── RSSI models ───────────────────────────────────────────────────────────────


def test_ideal_rssi_reference_distance(radio):
    u = UavState(0.0, 0.0, 0.0, 0.0)
    assert ideal_rssi([0.0, 1.0, 0.0], u, radio, ISOTROPIC) == pytest.approx(40.0)
    assert ideal_rssi([0.0, 10.0, 0.0], u, radio, ISOTROPIC) == pytest.approx(0.0)


def test_ideal_rssi_heading_periodicity(radio, pattern):
    x = [120.0, 340.0, 0.2]
    a = ideal_rssi(x, UavState(0.0, 0.0, 80.0, 0.7), radio, pattern)
    b = ideal_rssi(x, UavState(0.0, 0.0, 80.0, 0.7 + TWO_PI), radio, pattern)
    assert a == pytest.approx(b)


def test_ideal_rssi_zero_distance(radio, pattern):
    with pytest.raises(GeometryError):
        ideal_rssi([1.0, 1.0, 1.0], UavState(1.0, 1.0, 1.0, 0.0), radio, pattern)


def test_complex_equals_ideal_without_losses(radio, pattern):
    grid = constant_grid(100.0)
    x = [150.0, 150.0, 150.0]
    u = UavState(500.0, 400.0, 180.0, 0.3)
    veg = VegetationSpec(depth=0.0)
    assert complex_rssi(x, u, radio, pattern, grid, veg) == pytest.approx(ideal_rssi(x, u, radio, pattern))


def test_complex_behind_ridge_loses_at_least_ten_db(radio, pattern):
    x = [15.0, 15.0, 1.0]
    u = UavState(195.0, 15.0, 1.0, 0.0)
    veg = VegetationSpec(enabled=False)
    loss = ideal_rssi(x, u, radio, pattern) - complex_rssi(x, u, radio, pattern, ridge_grid(), veg)
    assert loss >= 10.0


def test_complex_never_exceeds_ideal(radio, pattern):
    from tagtrack.terrain.synthetic import generate_synthetic_terrain

    grid = generate_synthetic_terrain("mountain", 600.0, seed=5)
    rng = np.random.default_rng(0)
    veg = VegetationSpec(depth=1.0)
    for _ in range(20):
        tx, ty = rng.uniform(0, 600, 2)
        x = [tx, ty, float(grid.elevations.min()) + 0.2]
        u = UavState(*rng.uniform(0, 600, 2), float(grid.elevations.max()) + 80.0, rng.uniform(0, TWO_PI))
        assert complex_rssi(x, u, radio, pattern, grid, veg) <= ideal_rssi(x, u, radio, pattern) + 1e-12


# ── thresholded draws and detection probability ───────────────────────────────


def test_draw_far_above_threshold_always_present(radio):
    rng = np.random.default_rng(1)
    truth = radio.threshold + 10 * radio.sigma
    assert all(draw_rssi_measurement(truth, radio, rng) is not None for _ in range(10_000))


def test_draw_at_threshold_is_a_coin_flip(radio):
    rng = np.random.default_rng(2)
    present = sum(draw_rssi_measurement(radio.threshold, radio, rng) is not None for _ in range(100_000))
    assert present / 100_000 == pytest.approx(0.5, abs=0.01)


def test_draw_noiseless_limit():
    p = RadioParams(sigma=1e-12)
    assert draw_rssi_measurement(-80.0, p, np.random.default_rng(0)) == pytest.approx(-80.0)


def test_detection_probability_oracles(radio):
    assert detection_probability_from_level(radio.threshold, radio) == pytest.approx(0.5)
    h = radio.threshold + 4 * radio.sigma
    assert detection_probability_from_level(h, radio) == pytest.approx(ndtr(4.0))


def test_detection_probability_monotone_in_distance(radio):
    u = UavState(0.0, 0.0, 80.0, 0.0)
    probs = [detection_probability([0.0, d, 0.2], u, radio, ISOTROPIC) for d in (100, 500, 1000, 2000, 4000)]
    assert all(b <= a for a, b in zip(probs, probs[1:]))


def test_detection_probability_matches_empirical_pass_rate(radio, pattern):
    u = UavState(0.0, 0.0, 80.0, 0.0)
    x = [0.0, 12000.0, 0.2]
    expected = detection_probability(x, u, radio, pattern)
    truth = ideal_rssi(x, u, radio, pattern)
    rng = np.random.default_rng(3)
    n = 200_000
    passed = sum(draw_rssi_measurement(truth, radio, rng) is not None for _ in range(n))
    assert passed / n == pytest.approx(expected, abs=5e-3)


def test_propagation_model_switches_truth(radio, pattern):
    grid = ridge_grid()
    x = np.array([15.0, 15.0, 1.0])
    u = UavState(195.0, 15.0, 1.0, 0.0)
    with_losses = PropagationModel(radio, pattern, grid, VegetationSpec(enabled=False), terrain_effects=True)
    without = PropagationModel(radio, pattern, grid, VegetationSpec(enabled=False), terrain_effects=False)
    assert with_losses.truth_rssi(x, u) < without.truth_rssi(x, u)
    assert without.truth_rssi(x, u) == pytest.approx(float(with_losses.filter_rssi(x, u)))
