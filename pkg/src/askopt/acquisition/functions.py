"""Scalar acquisition functions over GP posteriors.

Every function here follows one convention: the *objective* is minimized,
the *acquisition* is maximized, and the return value is the triple
``(value, d/d mean, d/d variance)`` so gradient-based optimizers can chain
through the posterior derivatives. Inputs broadcast like numpy scalars or
arrays.

Near-zero predictive variance switches to an explicit degenerate branch
(values from the limit, zero variance-gradients) instead of dividing by a
vanishing standard deviation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ..errors import ValidationError

__all__ = [
    "AcquisitionContext",
    "LevelSetConfig",
    "expected_improvement",
    "augmented_expected_improvement",
    "negative_lower_confidence_bound",
    "probability_of_feasibility",
    "expected_feasibility",
    "predictive_variance",
]

_DEGENERATE_SD = 1e-12
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class AcquisitionContext:
    """Incumbent value and confidence weight shared by the classic criteria."""

    eta: float
    beta: float = 1.96

    def __post_init__(self):
        if not np.isfinite(self.eta):
            raise ValidationError("incumbent eta must be finite", field="eta")
        if not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError("beta must be non-negative", field="beta")


@dataclass(frozen=True)
class LevelSetConfig:
    """Target level ``threshold`` and band half-width scale for contour hunting."""

    threshold: float
    alpha: float = 2.0

    def __post_init__(self):
        if not np.isfinite(self.threshold):
            raise ValidationError("threshold must be finite", field="threshold")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError("alpha must be positive", field="alpha")


def _pdf(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _split(variance):
    variance = np.asarray(variance, dtype=float)
    sd = np.sqrt(np.maximum(variance, 0.0))
    degenerate = sd < _DEGENERATE_SD
    return sd, degenerate, np.where(degenerate, 1.0, sd)


def expected_improvement(mean, variance, context):
    """EI against the incumbent ``context.eta`` (minimization)."""
    mean = np.asarray(mean, dtype=float)
    sd, degenerate, safe_sd = _split(variance)
    gap = context.eta - mean
    z = gap / safe_sd
    cdf = ndtr(z)
    pdf = _pdf(z)
    value = np.where(degenerate, np.maximum(gap, 0.0), gap * cdf + sd * pdf)
    d_mean = np.where(degenerate, -(gap > 0.0).astype(float), -cdf)
    d_variance = np.where(degenerate, 0.0, pdf / (2.0 * safe_sd))
    return value, d_mean, d_variance


def augmented_expected_improvement(mean, variance, noise_variance, context):
    """EI damped by the fraction of predictive spread that is just noise.

    ``context.eta`` should already be the noisy incumbent (see the rules
    module for the convention used there).
    """
    if noise_variance < 0:
        raise ValidationError("noise variance must be non-negative", field="noise_variance")
    value, d_mean, d_variance = expected_improvement(mean, variance, context)
    variance = np.asarray(variance, dtype=float)
    total = variance + noise_variance
    if noise_variance == 0.0:
        factor = np.ones_like(total)
        d_factor = np.zeros_like(total)
    else:
        noise_sd = math.sqrt(noise_variance)
        factor = 1.0 - noise_sd / np.sqrt(total)
        d_factor = 0.5 * noise_sd * total ** (-1.5)
    return (
        value * factor,
        d_mean * factor,
        d_variance * factor + value * d_factor,
    )


def negative_lower_confidence_bound(mean, variance, context):
    """-mean + beta * sd; maximizing it minimizes the optimistic bound."""
    mean = np.asarray(mean, dtype=float)
    sd, degenerate, safe_sd = _split(variance)
    value = -mean + context.beta * sd
    d_mean = np.full_like(value, -1.0)
    d_variance = np.where(degenerate, 0.0, context.beta / (2.0 * safe_sd))
    return value, d_mean, d_variance


def probability_of_feasibility(mean, variance, threshold):
    """Posterior probability that the output lies at or below ``threshold``."""
    if not np.isfinite(threshold):
        raise ValidationError("threshold must be finite", field="threshold")
    mean = np.asarray(mean, dtype=float)
    sd, degenerate, safe_sd = _split(variance)
    z = (threshold - mean) / safe_sd
    pdf = _pdf(z)
    value = np.where(degenerate, (mean <= threshold).astype(float), ndtr(z))
    d_mean = np.where(degenerate, 0.0, -pdf / safe_sd)
    d_variance = np.where(degenerate, 0.0, -z * pdf / (2.0 * safe_sd * safe_sd))
    return value, d_mean, d_variance


def expected_feasibility(mean, variance, config):
    """E[max(eps - |threshold - Y|, 0)] with eps = alpha * sd: mass near the level set.

    Vanishing sd shrinks the band to nothing, so the degenerate value is 0.
    """
    mean = np.asarray(mean, dtype=float)
    sd, degenerate, safe_sd = _split(variance)
    z = (config.threshold - mean) / safe_sd
    z_lo = z - config.alpha
    z_hi = z + config.alpha
    cdf, cdf_lo, cdf_hi = ndtr(z), ndtr(z_lo), ndtr(z_hi)
    pdf, pdf_lo, pdf_hi = _pdf(z), _pdf(z_lo), _pdf(z_hi)
    eps = config.alpha * sd
    band = 2.0 * cdf - cdf_lo - cdf_hi
    value = (
        (mean - config.threshold) * band
        - sd * (2.0 * pdf - pdf_lo - pdf_hi)
        + eps * (cdf_hi - cdf_lo)
    )
    d_mean = band
    d_sd = config.alpha * (cdf_hi - cdf_lo) + pdf_lo + pdf_hi - 2.0 * pdf
    value = np.where(degenerate, 0.0, np.maximum(value, 0.0))
    d_mean = np.where(degenerate, 0.0, d_mean)
    d_variance = np.where(degenerate, 0.0, d_sd / (2.0 * safe_sd))
    return value, d_mean, d_variance


def predictive_variance(mean, variance):
    """Plain posterior variance, the uncertainty-sampling criterion."""
    variance = np.asarray(variance, dtype=float)
    value = np.maximum(variance, 0.0)
    return value, np.zeros_like(value), np.ones_like(value)
