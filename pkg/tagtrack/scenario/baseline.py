"""Plain SIR particle filter used as the comparison baseline.

No existence probability, no detection-probability term and no clutter
model: every received value is treated as a true measurement of the tag.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from rich.console import Console

from tagtrack.bernoulli.belief import (
    BernoulliBelief,
    BirthSampler,
    Likelihood,
    systematic_resample_indices,
)

console = Console()


def pf_baseline_update(
    belief: BernoulliBelief,
    measurements: Sequence[float],
    likelihood: Likelihood,
    rng: np.random.Generator,
    sampler: BirthSampler,
    resample: bool = True,
) -> BernoulliBelief:
    """Reweight by the product of likelihoods, then resample systematically.

    Missed scans leave the cloud untouched. If every particle ends up with
    zero weight the cloud is redrawn uniformly from `sampler`.
    """
    out = belief.copy()
    if len(measurements) == 0:
        return out

    n = belief.n_particles
    weights = belief.weights / belief.weights.sum()
    for z in measurements:
        weights = weights * np.asarray(likelihood(z, belief.particles), dtype=float)

    total = float(weights.sum())
    if not np.isfinite(total) or total <= 0:
        console.print(
            f"[yellow]⚠ Warning:[/yellow] baseline filter for tag {belief.tag_id} collapsed; "
            "reinitializing uniformly"
        )
        out.particles = np.asarray(sampler(rng, n), dtype=float)
        out.weights = np.full(n, 1.0 / n)
        return out

    if not resample:
        out.weights = weights / total
        return out

    idx = systematic_resample_indices(weights / total, rng)
    out.particles = belief.particles[idx]
    out.weights = np.full(n, 1.0 / n)
    return out
