import json

import numpy as np
import pytest

from tagtrack.bernoulli.belief import BernoulliBelief
from tagtrack.propagation.antenna import default_pattern, two_lobe_pattern
from tagtrack.propagation.rssi import RadioParams
from tagtrack.terrain.dem import TerrainGrid


def constant_grid(value: float = 100.0, n: int = 80, cell: float = 10.0, origin=(0.0, 0.0)) -> TerrainGrid:
    return TerrainGrid(
        n_cols=n,
        n_rows=n,
        cell_size=cell,
        origin=origin,
        elevations=np.full((n, n), value),
    )


def point_belief(tag_id: int, xyz, n: int = 50, r: float = 1.0) -> BernoulliBelief:
    particles = np.tile(np.asarray(xyz, dtype=float), (n, 1))
    return BernoulliBelief(tag_id=tag_id, r=r, particles=particles, weights=np.full(n, 1.0 / n))


def uniform_cloud(rng: np.random.Generator, n: int, width: float, height: float, z: float = 0.2) -> np.ndarray:
    return np.column_stack([rng.uniform(0, width, n), rng.uniform(0, height, n), np.full(n, z)])


@pytest.fixture
def pattern():
    return default_pattern()


@pytest.fixture
def two_lobe():
    return two_lobe_pattern()


@pytest.fixture
def radio():
    return RadioParams()


@pytest.fixture
def flat_grid():
    return constant_grid()


@pytest.fixture
def tiny_tree():
    """A scenario small enough to simulate in well under a second per minute of mission time."""
    return {
        "terrain": {"kind": "flat", "cell_size": 20.0, "seed": 3},
        "area": {"width": 400.0, "height": 400.0},
        "tags": {"count": 1, "mobility": "static", "positions": [[200.0, 300.0]]},
        "filter": {"n_particles": 200},
        "mission": {"time_cap": 30.0, "terrain_effects": False, "return_home": False},
    }


@pytest.fixture
def tiny_config_path(tmp_path, tiny_tree):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(tiny_tree), encoding="utf-8")
    return path
