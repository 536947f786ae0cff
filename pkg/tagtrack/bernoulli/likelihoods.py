"""Measurement likelihoods evaluated over particle clouds.

`model` arguments are noiseless RSSI predictors with the signature
model(points, uav) -> dBm array, e.g. PropagationModel.filter_rssi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.stats
from scipy.special import ndtr

from tagtrack.bernoulli.belief import Likelihood
from tagtrack.propagation.rssi import PropagationModel, absolute_bearing
from tagtrack.scenario.state import UavState, circular_distance

RssiModel = Callable[[np.ndarray, UavState], np.ndarray]

DEFAULT_IMPRECISION = (-16.0, 9.0)  # dB
DEFAULT_SIGMA_A = 0.095  # rad


def rssi_precise_likelihood(z: float, x, u: UavState, sigma: float, model: RssiModel):
    """N(z; h_R(x, u), sigma^2)."""
    return scipy.stats.norm.pdf(z, loc=model(x, u), scale=sigma)


def gaussian_interval_mass(z, lower, upper, sigma):
    """Mass of N(h; z, sigma^2) over h in [lower, upper], computed without
    cancellation in either tail."""
    a = (np.asarray(z, dtype=float) - lower) / sigma
    b = (np.asarray(z, dtype=float) - upper) / sigma
    # Phi(a) - Phi(b) == Phi(-b) - Phi(-a); use whichever side avoids 1 - 1
    upper_tail = b > 0
    mass = np.where(upper_tail, ndtr(-b) - ndtr(-a), ndtr(a) - ndtr(b))
    return mass if np.ndim(mass) else float(mass)


def rssi_imprecise_likelihood(
    z: float,
    x,
    u: UavState,
    sigma: float,
    mu_min: float,
    mu_max: float,
    model: RssiModel,
):
    """C(z; h_R + mu_min, sigma^2) - C(z; h_R + mu_max, sigma^2); always in [0, 1]."""
    if mu_min > mu_max:
        raise ValueError(f"mu_min ({mu_min}) must not exceed mu_max ({mu_max})")
    h = model(x, u)
    return gaussian_interval_mass(z, h + mu_min, h + mu_max, sigma)


def aoa_likelihood(z_a: float, x, u: UavState, sigma_a: float):
    """Gaussian in the wrapped residual between z_a and the bearing u -> x."""
    residual = circular_distance(z_a, absolute_bearing(x, u))
    return scipy.stats.norm.pdf(residual, loc=0.0, scale=sigma_a)


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Filter-side likelihoods bound to the filter's RSSI predictor.

    `imprecision` None selects the precise Gaussian RSSI likelihood.
    """

    propagation: PropagationModel
    sigma_r: float = 4.0
    imprecision: tuple[float, float] | None = DEFAULT_IMPRECISION
    sigma_a: float = DEFAULT_SIGMA_A

    def predicted_rssi(self, x, u: UavState):
        return self.propagation.filter_rssi(x, u)

    def rssi_likelihood(self, u: UavState) -> Likelihood:
        model = self.propagation.filter_rssi
        if self.imprecision is None:
            return lambda z, pts: rssi_precise_likelihood(z, pts, u, self.sigma_r, model)
        lo, hi = self.imprecision
        return lambda z, pts: rssi_imprecise_likelihood(z, pts, u, self.sigma_r, lo, hi, model)

    def aoa_likelihood(self, u: UavState) -> Likelihood:
        return lambda z, pts: aoa_likelihood(z, pts, u, self.sigma_a)

    def detection_probability(self, u: UavState) -> Callable[[np.ndarray], np.ndarray]:
        return lambda pts: self.propagation.filter_detection_probability(pts, u)
