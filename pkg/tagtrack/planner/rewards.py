"""Information rewards between a predicted belief and its PIMS posterior.

Both beliefs must share particle support: the posterior is the prior's
cloud reweighted, with no resampling in between.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tagtrack.bernoulli.belief import BernoulliBelief

REWARD_KINDS = ("renyi", "shannon", "cs")
DEFAULT_ALPHA = 0.1
HISTOGRAM_CELL = 20.0  # meters
REWARD_CAP = 1e3

_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class RewardSpec:
    kind: str = "renyi"
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if self.kind not in REWARD_KINDS:
            raise ValueError(f"reward kind must be one of {REWARD_KINDS}, got {self.kind!r}")
        if self.kind == "renyi" and (self.alpha < 0 or self.alpha == 1):
            raise ValueError(f"Renyi alpha must be >= 0 and != 1, got {self.alpha}")


@dataclass(frozen=True)
class HistogramGrid:
    """Fixed x-y binning of the search area used by the histogram estimators."""

    width: float
    height: float
    cell: float = HISTOGRAM_CELL

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        nx = max(1, int(np.ceil(self.width / self.cell)))
        ny = max(1, int(np.ceil(self.height / self.cell)))
        return np.linspace(0.0, nx * self.cell, nx + 1), np.linspace(0.0, ny * self.cell, ny + 1)

    @property
    def cell_area(self) -> float:
        return self.cell * self.cell

    def probabilities(self, belief: BernoulliBelief) -> np.ndarray:
        """Bin masses of the spatial density; particles off the grid land in the edge bins."""
        x_edges, y_edges = self.edges
        xs = np.clip(belief.particles[:, 0], x_edges[0], x_edges[-1])
        ys = np.clip(belief.particles[:, 1], y_edges[0], y_edges[-1])
        hist, _, _ = np.histogram2d(xs, ys, bins=(x_edges, y_edges), weights=_normalized(belief))
        return hist / hist.sum()


def _normalized(belief: BernoulliBelief) -> np.ndarray:
    return belief.weights / belief.weights.sum()


def _check_support(prior: BernoulliBelief, posterior: BernoulliBelief) -> None:
    if prior.particles.shape != posterior.particles.shape:
        raise ValueError("prior and posterior must share particle support")


# ── Renyi ─────────────────────────────────────────────────────────────────────


def renyi_reward(prior: BernoulliBelief, posterior: BernoulliBelief, alpha: float = DEFAULT_ALPHA) -> float:
    """Renyi divergence between Bernoulli densities, shared-support estimator.

    (1/(alpha-1)) log[(1-r_p)^a (1-r_q)^(1-a) + r_p^a r_q^(1-a) S],
    S = sum_i w_i (w'_i / w_i)^(1-a).
    """
    if alpha == 1:
        raise ValueError("Renyi alpha must differ from 1")
    _check_support(prior, posterior)
    w = _normalized(prior)
    w_post = _normalized(posterior)
    live = w > 0
    ratio = np.maximum(w_post[live], _WEIGHT_FLOOR) / w[live]
    spatial = float(np.sum(w[live] * ratio ** (1.0 - alpha)))

    r_p, r_q = prior.r, posterior.r
    absent = (1.0 - r_p) ** alpha * (1.0 - r_q) ** (1.0 - alpha)
    present = r_p**alpha * r_q ** (1.0 - alpha) * spatial
    total = absent + present
    if total <= 0:
        return REWARD_CAP
    return float(np.log(total) / (alpha - 1.0))


# ── Shannon ───────────────────────────────────────────────────────────────────


def binary_entropy(r: float) -> float:
    if r <= 0.0 or r >= 1.0:
        return 0.0
    return float(-r * np.log(r) - (1.0 - r) * np.log(1.0 - r))


def bernoulli_entropy(belief: BernoulliBelief, grid: HistogramGrid) -> float:
    """Binary entropy of r plus r times the histogram differential entropy."""
    p = grid.probabilities(belief)
    p = p[p > 0]
    spatial = float(-np.sum(p * np.log(p / grid.cell_area)))
    return binary_entropy(belief.r) + belief.r * spatial


def shannon_reward(prior: BernoulliBelief, posterior: BernoulliBelief, grid: HistogramGrid) -> float:
    _check_support(prior, posterior)
    return bernoulli_entropy(prior, grid) - bernoulli_entropy(posterior, grid)


# ── Cauchy-Schwarz ────────────────────────────────────────────────────────────


def _bernoulli_inner(
    r_f: float, p_f: np.ndarray, r_g: float, p_g: np.ndarray, cell_area: float
) -> float:
    return (1.0 - r_f) * (1.0 - r_g) + r_f * r_g * float(np.sum(p_f * p_g)) / cell_area


def cs_reward(prior: BernoulliBelief, posterior: BernoulliBelief, grid: HistogramGrid) -> float:
    """-log(<f,g> / (sqrt(<f,f>) sqrt(<g,g>))) on the histogram grid, capped at REWARD_CAP."""
    _check_support(prior, posterior)
    p = grid.probabilities(prior)
    q = grid.probabilities(posterior)
    a = grid.cell_area
    cross = _bernoulli_inner(prior.r, p, posterior.r, q, a)
    norm_p = _bernoulli_inner(prior.r, p, prior.r, p, a)
    norm_q = _bernoulli_inner(posterior.r, q, posterior.r, q, a)
    if norm_p <= 0 or norm_q <= 0:
        raise ValueError("Cauchy-Schwarz reward undefined for a zero-norm density")
    if cross <= 0:
        return REWARD_CAP
    value = -float(np.log(cross / np.sqrt(norm_p * norm_q)))
    return float(min(max(value, 0.0), REWARD_CAP))


def reward(
    prior: BernoulliBelief,
    posterior: BernoulliBelief,
    spec: RewardSpec,
    grid: HistogramGrid,
) -> float:
    if spec.kind == "renyi":
        return renyi_reward(prior, posterior, spec.alpha)
    if spec.kind == "shannon":
        return shannon_reward(prior, posterior, grid)
    return cs_reward(prior, posterior, grid)
