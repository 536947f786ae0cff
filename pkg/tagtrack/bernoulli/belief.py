"""Bernoulli (JoTT) particle filter for a single radio tag.

A belief holds the existence probability r and a weighted particle cloud
approximating the spatial density. Each function returns a new belief and
leaves its input untouched, so planner rollouts can branch freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from tagtrack.errors import WeightCollapseError
from tagtrack.scenario.state import TWO_PI

LIKELIHOOD_FLOOR = 1e-300
DEFAULT_PARTICLES = 3000
DEFAULT_LOCALIZATION_THRESHOLD = 2e4  # m^4

BirthSampler = Callable[[np.random.Generator, int], np.ndarray]
Likelihood = Callable[[float, np.ndarray], np.ndarray]


@dataclass
class BernoulliBelief:
    tag_id: int
    r: float
    particles: np.ndarray  # (N, 3) tag positions
    weights: np.ndarray  # (N,), sums to 1
    localized: bool = False
    r_clamps: int = 0

    def __post_init__(self) -> None:
        self.particles = np.asarray(self.particles, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.particles.ndim != 2 or self.particles.shape[1] != 3:
            raise ValueError(f"particles must have shape (N, 3), got {self.particles.shape}")
        if self.weights.shape != (len(self.particles),):
            raise ValueError("one weight per particle is required")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"existence probability must lie in [0, 1], got {self.r}")

    @property
    def n_particles(self) -> int:
        return len(self.weights)

    def copy(self) -> "BernoulliBelief":
        return replace(self, particles=self.particles.copy(), weights=self.weights.copy())


@dataclass(frozen=True)
class DynamicsModel:
    """Wandering model: identity transition plus diagonal process noise."""

    process_variance: tuple[float, float, float] = (2.5, 2.5, 0.0025)  # m^2 per step
    survival: float = 0.999
    birth: float = 1e-5
    birth_sampler: BirthSampler | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.process_variance):
            raise ValueError("process variance must be non-negative")
        for name in ("survival", "birth"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} probability must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ClutterModel:
    """Poisson false measurements with a uniform density over [low, high]."""

    rate: float = 0.05  # expected false measurements per scan
    low: float = -120.0
    high: float = 0.0

    def __post_init__(self) -> None:
        if self.rate < 0:
            raise ValueError(f"clutter rate must be >= 0, got {self.rate}")
        if not self.high > self.low:
            raise ValueError("clutter range must have positive width")

    @classmethod
    def rssi(cls, rate: float = 0.05, low: float = -120.0, high: float = 0.0) -> "ClutterModel":
        return cls(rate=rate, low=low, high=high)

    @classmethod
    def aoa(cls, rate: float = 0.05) -> "ClutterModel":
        return cls(rate=rate, low=0.0, high=TWO_PI)

    @property
    def density(self) -> float:
        return 1.0 / (self.high - self.low)

    @property
    def intensity(self) -> float:
        """lambda * c(z), constant for a uniform density."""
        return self.rate * self.density


@dataclass(frozen=True)
class EstimateSummary:
    mean: np.ndarray  # (3,)
    covariance_xy: np.ndarray  # (2, 2)
    determinant: float  # m^4
    localized: bool


def uniform_belief(
    tag_id: int,
    sampler: BirthSampler,
    rng: np.random.Generator,
    n_particles: int = DEFAULT_PARTICLES,
    r: float = 0.5,
) -> BernoulliBelief:
    particles = sampler(rng, n_particles)
    return BernoulliBelief(
        tag_id=tag_id,
        r=r,
        particles=particles,
        weights=np.full(n_particles, 1.0 / n_particles),
    )


# ── Predict ───────────────────────────────────────────────────────────────────


def predict(belief: BernoulliBelief, dyn: DynamicsModel, rng: np.random.Generator) -> BernoulliBelief:
    """r' = r_b (1 - r) + r_s r, particles diffused, births mixed in.

    Birth particles replace the lowest-weight survivors and carry total
    weight r_b (1 - r) / r'. When that share rounds to zero particles the
    birth term is dropped from the spatial density.
    """
    out = belief.copy()
    out.weights = out.weights / out.weights.sum()
    r_pred = dyn.birth * (1.0 - belief.r) + dyn.survival * belief.r
    out.r = float(min(max(r_pred, 0.0), 1.0))

    std = np.sqrt(np.asarray(dyn.process_variance, dtype=float))
    if np.any(std > 0):
        out.particles = out.particles + rng.normal(0.0, 1.0, out.particles.shape) * std

    if r_pred <= 0 or dyn.birth_sampler is None:
        return out
    birth_share = dyn.birth * (1.0 - belief.r) / r_pred
    n_birth = int(round(birth_share * out.n_particles))
    if n_birth == 0:
        return out

    replaced = np.argsort(out.weights, kind="stable")[:n_birth]
    keep = np.ones(out.n_particles, dtype=bool)
    keep[replaced] = False
    out.particles[replaced] = dyn.birth_sampler(rng, n_birth)
    out.weights[replaced] = birth_share / n_birth
    kept_mass = out.weights[keep].sum()
    if kept_mass > 0:
        out.weights[keep] *= (1.0 - birth_share) / kept_mass
    out.weights /= out.weights.sum()
    return out


# ── Update ────────────────────────────────────────────────────────────────────


def update(
    belief: BernoulliBelief,
    measurements: Sequence[float],
    likelihood: Likelihood,
    detection_prob: Callable[[np.ndarray], np.ndarray] | float,
    clutter: ClutterModel,
) -> BernoulliBelief:
    """Bernoulli measurement update with missed detections and clutter.

    With g(x) = 1 - P_D(x) + P_D(x) sum_z L(z|x) / (lambda c(z)),
    1 - Delta = sum_i w_i g(x_i), r' = r (1 - Delta) / (1 - r Delta), w' ~ w g.
    lambda = 0 with at least one measurement is taken as the limit: r' = 1
    (for r > 0) and w' ~ w P_D sum_z L.
    """
    out = belief.copy()
    points = belief.particles
    w = belief.weights / belief.weights.sum()
    if callable(detection_prob):
        p_d = np.broadcast_to(np.asarray(detection_prob(points), dtype=float), w.shape)
    else:
        p_d = np.full(w.shape, float(detection_prob))

    total_likelihood = np.zeros_like(w)
    for z in measurements:
        total_likelihood += np.asarray(likelihood(z, points), dtype=float)

    kappa = clutter.intensity
    if len(measurements) > 0 and kappa == 0:
        g = p_d * total_likelihood
        r_post = 1.0 if belief.r > 0 else 0.0
    else:
        g = 1.0 - p_d
        if len(measurements) > 0:
            g = g + p_d * total_likelihood / kappa
        mass = float(np.dot(w, g))  # 1 - Delta
        denom = 1.0 - belief.r + belief.r * mass
        r_post = belief.r * mass / denom if denom > 0 else 0.0

    if not 0.0 <= r_post <= 1.0:
        out.r_clamps += 1
        r_post = min(max(r_post, 0.0), 1.0)
    out.r = float(r_post)

    posterior = w * g
    if posterior.sum() <= 0:
        # Certain detection and nothing detected: spatial posterior is 0/0
        return out
    posterior = w * np.maximum(g, LIKELIHOOD_FLOOR)
    out.weights = posterior / posterior.sum()
    return out


# ── Resample / estimate ───────────────────────────────────────────────────────


def effective_sample_size(weights: np.ndarray) -> float:
    return 1.0 / float(np.sum(np.square(weights)))


def systematic_resample_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniform offset, N evenly spaced positions through the weight CDF."""
    n = len(weights)
    positions = (rng.random() + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.minimum(np.searchsorted(cumulative, positions, side="right"), n - 1)


def resample(belief: BernoulliBelief, rng: np.random.Generator, force: bool = False) -> BernoulliBelief:
    """Systematic resampling when the effective sample size drops below N/2."""
    total = float(belief.weights.sum())
    if total <= 0 or not np.isfinite(total):
        raise WeightCollapseError(f"tag {belief.tag_id}: all particle weights are zero")
    weights = belief.weights / total
    n = belief.n_particles
    if not force and effective_sample_size(weights) >= n / 2:
        return belief.copy()

    indexes = systematic_resample_indices(weights, rng)
    out = belief.copy()
    out.particles = belief.particles[indexes]
    out.weights = np.full(n, 1.0 / n)
    return out


def estimate(belief: BernoulliBelief, n_th: float = DEFAULT_LOCALIZATION_THRESHOLD) -> EstimateSummary:
    """Weighted mean, x-y covariance and its determinant."""
    w = belief.weights / belief.weights.sum()
    mean = w @ belief.particles
    centered = belief.particles[:, :2] - mean[:2]
    cov = (centered * w[:, None]).T @ centered
    det = max(float(np.linalg.det(cov)), 0.0)
    return EstimateSummary(mean=mean, covariance_xy=cov, determinant=det, localized=det <= n_th)


def export_belief_csv(belief: BernoulliBelief, path: str | Path) -> None:
    """Particle snapshot for plotting: '# tag_id=..., r=...' then x,y,z,weight rows."""
    frame = pd.DataFrame(
        {
            "x": belief.particles[:, 0],
            "y": belief.particles[:, 1],
            "z": belief.particles[:, 2],
            "weight": belief.weights,
        }
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# tag_id={belief.tag_id}, r={belief.r!r}\n")
        frame.to_csv(fh, index=False)
