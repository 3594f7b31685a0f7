"""Exact Gaussian-process regression with analytic gradients.

Constant mean, ARD squared-exponential or Matern-5/2 kernel, Gaussian
observation noise. Hyperparameters are chosen by multi-restart gradient
ascent of the log marginal likelihood in log-space. A fitted model is an
immutable value and safe for concurrent reads.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from . import _backend
from ._lbfgs import minimize_lbfgs_box
from ._seeding import check_seed, rng_from
from .data import Dataset
from .errors import (
    DimensionMismatchError,
    ModelFitError,
    NotPositiveDefiniteError,
    ValidationError,
)

__all__ = [
    "SQUARED_EXPONENTIAL",
    "MATERN52",
    "Kernel",
    "GPHyperparameters",
    "PosteriorPrediction",
    "GPModel",
    "FitConfig",
    "kernel_matrix",
    "log_marginal_likelihood",
    "fit",
    "sample_joint",
]

SQUARED_EXPONENTIAL = "squared-exponential"
MATERN52 = "matern-5/2"
_FAMILIES = (SQUARED_EXPONENTIAL, MATERN52)

_SQRT5 = math.sqrt(5.0)
_LOG_2PI = math.log(2.0 * math.pi)
# diagonal jitter ladder, relative to the kernel variance
_JITTER_START = 1e-8
_JITTER_LIMIT = 1e-2


@dataclass(frozen=True, eq=False)
class Kernel:
    family: str
    variance: float
    lengthscales: np.ndarray

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown kernel family {self.family!r}", field="family")
        object.__setattr__(self, "variance", float(self.variance))
        scales = np.atleast_1d(np.asarray(self.lengthscales, dtype=float)).copy()
        scales.setflags(write=False)
        object.__setattr__(self, "lengthscales", scales)
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise ValidationError("kernel variance must be positive", field="variance")
        if scales.ndim != 1 or not np.all(np.isfinite(scales)) or not np.all(scales > 0):
            raise ValidationError("lengthscales must be positive reals", field="lengthscales")

    @property
    def dimension(self):
        return self.lengthscales.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return (
            self.family == other.family
            and self.variance == other.variance
            and np.array_equal(self.lengthscales, other.lengthscales)
        )


@dataclass(frozen=True, eq=False)
class GPHyperparameters:
    kernel: Kernel
    mean: float
    noise_variance: float

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "noise_variance", float(self.noise_variance))
        if not np.isfinite(self.mean):
            raise ValidationError("mean must be finite", field="mean")
        if not (np.isfinite(self.noise_variance) and self.noise_variance >= 0):
            raise ValidationError("noise variance must be non-negative", field="noise_variance")

    def __eq__(self, other):
        if not isinstance(other, GPHyperparameters):
            return NotImplemented
        return (
            self.kernel == other.kernel
            and self.mean == other.mean
            and self.noise_variance == other.noise_variance
        )

    def to_json(self):
        return {
            "family": self.kernel.family,
            "variance": self.kernel.variance,
            "lengthscales": self.kernel.lengthscales.tolist(),
            "mean": self.mean,
            "noise_variance": self.noise_variance,
        }

    @classmethod
    def from_json(cls, payload):
        required = {"family", "variance", "lengthscales", "mean", "noise_variance"}
        if not isinstance(payload, dict) or not required <= set(payload):
            raise ValidationError("malformed hyperparameter payload", field="hyperparameters")
        return cls(
            Kernel(payload["family"], payload["variance"], payload["lengthscales"]),
            payload["mean"],
            payload["noise_variance"],
        )


class PosteriorPrediction(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray  # latent (noise-free), clamped non-negative


def kernel_matrix(kernel, a, b):
    """Cross-covariance matrix between row sets ``a`` (n x D) and ``b`` (m x D)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or b.ndim != 2:
        raise ValidationError("kernel inputs must be 2-d arrays", field="a/b")
    if a.shape[1] != kernel.dimension:
        raise DimensionMismatchError(kernel.dimension, a.shape[1], "kernel input a")
    if b.shape[1] != kernel.dimension:
        raise DimensionMismatchError(kernel.dimension, b.shape[1], "kernel input b")
    if kernel.family == SQUARED_EXPONENTIAL:
        return _backend.kernel_se(a, b, kernel.variance, kernel.lengthscales)
    return _backend.kernel_matern52(a, b, kernel.variance, kernel.lengthscales)


def _cholesky_ladder(matrix, scale):
    """Cholesky with escalating diagonal jitter, relative to ``scale``.

    Starts at 1e-8 * scale and multiplies by 10 up to 1e-2 * scale before
    giving up.
    """
    jitter = _JITTER_START * scale
    limit = _JITTER_LIMIT * scale
    eye = np.eye(matrix.shape[0])
    while True:
        try:
            return np.linalg.cholesky(matrix + jitter * eye), jitter
        except np.linalg.LinAlgError:
            if jitter >= limit:
                raise NotPositiveDefiniteError(jitter) from None
            jitter = min(jitter * 10.0, limit)


def _lml_terms(family, variance, lengthscales, mean, noise_variance, points, targets):
    """LML value and packed gradient [log v, log l_1..D, mean, log noise]."""
    n = points.shape[0]
    axis_sq = ((points[:, None, :] - points[None, :, :]) / lengthscales) ** 2
    d2 = axis_sq.sum(axis=2)
    if family == SQUARED_EXPONENTIAL:
        gram = variance * np.exp(-0.5 * d2)
        scale_weight = gram
    else:
        r = np.sqrt(np.maximum(d2, 0.0))
        decay = np.exp(-_SQRT5 * r)
        gram = variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * d2) * decay
        scale_weight = (5.0 / 3.0) * variance * (1.0 + _SQRT5 * r) * decay

    factor, jitter = _cholesky_ladder(gram + noise_variance * np.eye(n), variance)
    resid = targets - mean
    alpha = cho_solve((factor, True), resid)
    value = (
        -0.5 * float(resid @ alpha)
        - float(np.sum(np.log(np.diag(factor))))
        - 0.5 * n * _LOG_2PI
    )

    inv = cho_solve((factor, True), np.eye(n))
    outer = np.outer(alpha, alpha) - inv
    # the jitter scales with v, so it contributes to the log-variance gradient
    g_log_variance = 0.5 * (float(np.sum(outer * gram)) + jitter * float(np.trace(outer)))
    g_log_lengthscales = 0.5 * np.einsum("ij,ijd->d", outer * scale_weight, axis_sq)
    g_mean = float(np.sum(alpha))
    g_log_noise = 0.5 * noise_variance * float(np.trace(outer))
    gradient = np.concatenate(
        [[g_log_variance], g_log_lengthscales, [g_mean], [g_log_noise]]
    )
    return value, gradient


def log_marginal_likelihood(hyperparameters, dataset):
    """LML of ``dataset`` under the hyperparameters, with analytic gradients.

    Returns ``(value, grads)`` where grads maps "log_variance",
    "log_lengthscales", "mean" and "log_noise_variance" to the derivatives in
    that parameterization. The diagonal jitter is treated as part of the
    model (it scales with the kernel variance), so the gradients match finite
    differences of this same function.
    """
    if dataset.size < 1:
        raise ValidationError("log marginal likelihood needs at least one row", field="dataset")
    if dataset.outputs != 1:
        raise ValidationError("model data must have exactly one output column", field="dataset")
    if dataset.dimension != hyperparameters.kernel.dimension:
        raise DimensionMismatchError(
            hyperparameters.kernel.dimension, dataset.dimension, "dataset"
        )
    kernel = hyperparameters.kernel
    value, packed = _lml_terms(
        kernel.family,
        kernel.variance,
        kernel.lengthscales,
        hyperparameters.mean,
        hyperparameters.noise_variance,
        dataset.query_points,
        dataset.observations[:, 0],
    )
    d = kernel.dimension
    grads = {
        "log_variance": float(packed[0]),
        "log_lengthscales": packed[1 : 1 + d].copy(),
        "mean": float(packed[1 + d]),
        "log_noise_variance": float(packed[2 + d]),
    }
    return value, grads


class GPModel:
    """A GP conditioned on its training data, with a cached factorization."""

    __slots__ = ("hyperparameters", "training_data", "_factor", "_alpha", "_jitter")

    def __init__(self, hyperparameters, training_data):
        if training_data.outputs != 1:
            raise ValidationError(
                "model data must have exactly one output column", field="training_data"
            )
        if training_data.dimension != hyperparameters.kernel.dimension:
            raise DimensionMismatchError(
                hyperparameters.kernel.dimension, training_data.dimension, "training_data"
            )
        object.__setattr__(self, "hyperparameters", hyperparameters)
        object.__setattr__(self, "training_data", training_data)
        if training_data.size == 0:
            object.__setattr__(self, "_factor", None)
            object.__setattr__(self, "_alpha", None)
            object.__setattr__(self, "_jitter", 0.0)
            return
        kernel = hyperparameters.kernel
        gram = kernel_matrix(kernel, training_data.query_points, training_data.query_points)
        shifted = gram + hyperparameters.noise_variance * np.eye(training_data.size)
        factor, jitter = _cholesky_ladder(shifted, kernel.variance)
        resid = training_data.observations[:, 0] - hyperparameters.mean
        alpha = cho_solve((factor, True), resid)
        object.__setattr__(self, "_factor", factor)
        object.__setattr__(self, "_alpha", alpha)
        object.__setattr__(self, "_jitter", jitter)

    def __setattr__(self, name, value):
        raise AttributeError("GPModel is immutable")

    @property
    def dimension(self):
        return self.hyperparameters.kernel.dimension

    def _check_query(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 2:
            raise ValidationError("query points must be a 2-d array", field="x")
        if x.shape[1] != self.dimension:
            raise DimensionMismatchError(self.dimension, x.shape[1], "query points")
        if x.shape[0] < 1:
            raise ValidationError("need at least one query point", field="x")
        return x

    def predict(self, x):
        """Marginal posterior mean and latent variance at each row of ``x``."""
        x = self._check_query(x)
        hp = self.hyperparameters
        if self.training_data.size == 0:
            mean = np.full(x.shape[0], hp.mean)
            variance = np.full(x.shape[0], hp.kernel.variance)
            return PosteriorPrediction(mean, variance)
        cross = kernel_matrix(hp.kernel, self.training_data.query_points, x)
        mean = hp.mean + cross.T @ self._alpha
        half = solve_triangular(self._factor, cross, lower=True)
        variance = np.maximum(hp.kernel.variance - np.sum(half * half, axis=0), 0.0)
        return PosteriorPrediction(mean, variance)

    def predict_joint(self, x):
        """Posterior mean vector and full q x q latent covariance at ``x``."""
        x = self._check_query(x)
        hp = self.hyperparameters
        prior = kernel_matrix(hp.kernel, x, x)
        if self.training_data.size == 0:
            mean = np.full(x.shape[0], hp.mean)
            cov = 0.5 * (prior + prior.T)
            return mean, cov
        cross = kernel_matrix(hp.kernel, self.training_data.query_points, x)
        mean = hp.mean + cross.T @ self._alpha
        half = solve_triangular(self._factor, cross, lower=True)
        cov = prior - half.T @ half
        cov = 0.5 * (cov + cov.T)
        np.fill_diagonal(cov, np.maximum(np.diag(cov), 0.0))
        return mean, cov

    def predict_gradient(self, x):
        """Analytic d(mean)/dx and d(variance)/dx at a single point."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dimension:
            got = x.shape[0] if x.ndim == 1 else x.shape
            raise DimensionMismatchError(self.dimension, got, "point")
        if self.training_data.size == 0:
            return np.zeros_like(x), np.zeros_like(x)
        hp = self.hyperparameters
        kernel = hp.kernel
        train = self.training_data.query_points
        cross = kernel_matrix(kernel, train, x[None, :])[:, 0]
        scaled = (x[None, :] - train) / kernel.lengthscales**2
        if kernel.family == SQUARED_EXPONENTIAL:
            jac = -cross[:, None] * scaled
        else:
            d2 = _backend.scaled_sqdist(x[None, :], train, kernel.lengthscales)[0]
            r = np.sqrt(d2)
            weight = (5.0 / 3.0) * kernel.variance * (1.0 + _SQRT5 * r) * np.exp(-_SQRT5 * r)
            # the stated derivative has a 0/0 at r == 0; its limit there is 0,
            # and this form evaluates to exactly that
            jac = -weight[:, None] * scaled
        d_mean = jac.T @ self._alpha
        weights = cho_solve((self._factor, True), cross)
        d_variance = -2.0 * (jac.T @ weights)
        return d_mean, d_variance

    def sample(self, x, count, seed):
        """``count`` joint posterior draws at the rows of ``x``; (count, q) array."""
        mean, cov = self.predict_joint(x)
        return sample_joint(mean, cov, count, seed, self.hyperparameters.kernel.variance)


def sample_joint(mean, cov, count, seed, scale):
    """Draw from N(mean, cov) via a jittered Cholesky factor.

    A covariance that is numerically zero (no positive diagonal entry) yields
    the mean repeated, with no randomness consumed.
    """
    check_seed(seed)
    if not isinstance(count, (int, np.integer)) or isinstance(count, bool) or count < 1:
        raise ValidationError("sample count must be a positive integer", field="count")
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if float(np.max(np.diag(cov), initial=0.0)) <= 0.0:
        return np.tile(mean, (int(count), 1))
    factor, _ = _cholesky_ladder(cov, scale)
    draws = rng_from(seed).standard_normal((int(count), mean.shape[0]))
    return mean[None, :] + draws @ factor.T


@dataclass(frozen=True)
class FitConfig:
    family: str = MATERN52
    restarts: int = 5
    perturbation_sd: float = 0.5
    max_iterations: int = 100

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValidationError(f"unknown kernel family {self.family!r}", field="family")
        if self.restarts < 1:
            raise ValidationError("need at least one restart", field="restarts")


def _default_hyperparameters(dataset, family):
    targets = dataset.observations[:, 0]
    data_variance = float(np.var(targets))
    if not data_variance > 0.0:
        data_variance = 1.0
    ranges = np.ptp(dataset.query_points, axis=0)
    ranges = np.where(ranges > 0.0, ranges, 1.0)
    kernel = Kernel(family, data_variance, ranges / 2.0)
    return GPHyperparameters(kernel, float(np.mean(targets)), 1e-2 * data_variance), ranges


def fit(dataset, config=None, seed=0, warm_start=None):
    """Fit a GP to ``dataset`` by multi-restart LML ascent.

    One restart starts from the data-driven defaults (mean = data mean,
    variance = data variance, lengthscales = half the per-axis range, noise
    variance = 1e-2 * data variance); the rest perturb the positive
    parameters by log-normal factors. Passing previously fitted
    hyperparameters as ``warm_start`` centres the first restart and the
    perturbations there instead, which is how refits inside a loop stay
    close to the last optimum. The best restart wins, ties going to the
    earliest. With fewer than two rows there is nothing to fit and the
    defaults are returned unchanged.
    """
    if config is None:
        config = FitConfig()
    check_seed(seed)
    if dataset.size < 1:
        raise ValidationError("fit needs at least one row", field="dataset")
    if dataset.outputs != 1:
        raise ValidationError("model data must have exactly one output column", field="dataset")

    defaults, ranges = _default_hyperparameters(dataset, config.family)
    if dataset.size < 2:
        return GPModel(defaults, dataset)

    d = dataset.dimension
    lower = np.concatenate([[-20.0], np.log(1e-3 * ranges), [-np.inf], [-20.0]])
    upper = np.concatenate([[20.0], np.log(10.0 * ranges), [np.inf], [20.0]])

    initial = defaults
    if warm_start is not None:
        if len(warm_start.kernel.lengthscales) != d:
            raise ValidationError(
                "warm start lengthscales do not match the data dimension",
                field="warm_start",
            )
        initial = warm_start
    theta0 = np.concatenate(
        [
            [math.log(initial.kernel.variance)],
            np.log(initial.kernel.lengthscales),
            [initial.mean],
            [math.log(initial.noise_variance)],
        ]
    )
    rng = rng_from(seed)
    starts = [theta0]
    for _ in range(config.restarts - 1):
        shift = np.zeros_like(theta0)
        shift[0] = rng.normal(0.0, config.perturbation_sd)
        shift[1 : 1 + d] = rng.normal(0.0, config.perturbation_sd, size=d)
        shift[2 + d] = rng.normal(0.0, config.perturbation_sd)
        starts.append(theta0 + shift)

    points = dataset.query_points
    targets = dataset.observations[:, 0]
    memo = {}

    def evaluate(theta):
        key = theta.tobytes()
        if key not in memo:
            if len(memo) > 512:
                memo.clear()
            try:
                value, gradient = _lml_terms(
                    config.family,
                    math.exp(theta[0]),
                    np.exp(theta[1 : 1 + d]),
                    theta[1 + d],
                    math.exp(theta[2 + d]),
                    points,
                    targets,
                )
                memo[key] = (-value, -gradient)
            except NotPositiveDefiniteError:
                memo[key] = (np.inf, np.zeros_like(theta))
        return memo[key]

    results = []
    for start in starts:
        outcome = minimize_lbfgs_box(
            lambda t: evaluate(t)[0],
            lambda t: evaluate(t)[1],
            np.clip(start, lower, upper),
            lower,
            upper,
            max_iterations=config.max_iterations,
        )
        if outcome.usable and np.isfinite(outcome.value):
            results.append(outcome)
        else:
            results.append(None)

    best = None
    for outcome in results:
        if outcome is not None and (best is None or outcome.value < best.value):
            best = outcome
    if best is None:
        raise ModelFitError("every fitting restart failed to factorize the kernel matrix")

    theta = best.point
    kernel = Kernel(config.family, math.exp(theta[0]), np.exp(theta[1 : 1 + d]))
    hyperparameters = GPHyperparameters(kernel, float(theta[1 + d]), math.exp(theta[2 + d]))
    return GPModel(hyperparameters, dataset)
