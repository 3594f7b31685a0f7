"""Acquisition rules: how the next query points get recommended.

Four rule kinds share one continuous optimizer (quasi-random screening plus
multi-start projected quasi-Newton ascent): single-point EGO, greedy
penalized batches, TREGO trust-region alternation, and discrete batched
Thompson sampling. Everything is deterministic given its seed.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from ._lbfgs import minimize_lbfgs_box
from ._seeding import check_seed, derive_seed
from .acquisition import (
    AcquisitionContext,
    LevelSetConfig,
    PenalizationState,
    augmented_expected_improvement,
    ehvi_mc,
    estimate_lipschitz,
    expected_feasibility,
    expected_improvement,
    log_penalty,
    log_penalty_gradient,
    log_softplus,
    log_softplus_gradient,
    negative_lower_confidence_bound,
    pareto_front,
    predictive_variance,
    probability_of_feasibility,
)
from .data import OBJECTIVE
from .errors import ConfigError, OptimizationError, ValidationError

__all__ = [
    "OptimizerConfig",
    "RuleConfig",
    "TrustRegionState",
    "optimize_acquisition",
    "ego_step",
    "initial_trust_region",
    "trego_step",
    "trego_update",
    "thompson_step",
    "ACQUISITION_NAMES",
    "RULE_KINDS",
]

ACQUISITION_NAMES = ("ei", "aei", "nlcb", "cei", "ef", "var", "ehvi", "thompson")
RULE_KINDS = ("ego", "batch-penalized", "trego", "thompson-discrete")

_SUCCESS_MARGIN = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    """Screening and ascent budget for the continuous acquisition optimizer.

    ``num_presamples=None`` resolves to 2000 per dimension, capped at 20000.
    """

    num_presamples: int = None
    num_starts: int = 8
    max_iterations: int = 100
    gradient_tolerance: float = 1e-8
    memory: int = 10

    def __post_init__(self):
        if self.num_starts < 1:
            raise ConfigError("num_starts must be at least 1")
        if self.num_presamples is not None and self.num_presamples < self.num_starts:
            raise ConfigError("num_presamples must be at least num_starts")
        if self.max_iterations < 1 or self.memory < 1:
            raise ConfigError("max_iterations and memory must be positive")
        if self.gradient_tolerance <= 0:
            raise ConfigError("gradient_tolerance must be positive")

    def resolved_presamples(self, dimension):
        if self.num_presamples is not None:
            return self.num_presamples
        return max(min(2000 * dimension, 20000), self.num_starts)

    def to_json(self):
        return {
            "num_presamples": self.num_presamples,
            "num_starts": self.num_starts,
            "max_iterations": self.max_iterations,
            "gradient_tolerance": self.gradient_tolerance,
            "memory": self.memory,
        }

    @classmethod
    def from_json(cls, payload):
        return cls(**payload)


@dataclass(frozen=True)
class RuleConfig:
    """Which rule runs, its batch size, and the acquisition plus constants."""

    kind: str = "ego"
    batch_size: int = 1
    acquisition: str = "ei"
    beta: float = 1.96
    alpha: float = 2.0
    threshold: float = 0.0
    mc_samples: int = 4096
    reference_margin: float = 0.1
    candidate_count: int = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigError(f"unknown rule kind {self.kind!r}")
        if self.acquisition not in ACQUISITION_NAMES:
            raise ConfigError(f"unknown acquisition {self.acquisition!r}")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.kind == "trego" and self.batch_size != 1:
            raise ConfigError("trego runs one point per step")
        if self.kind == "thompson-discrete":
            if self.candidate_count is not None and self.candidate_count < self.batch_size:
                raise ConfigError("candidate_count must be at least batch_size")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples must be positive")

    def resolved_candidates(self, dimension):
        if self.candidate_count is not None:
            return self.candidate_count
        return max(min(1000 * dimension, 10000), self.batch_size)

    def to_json(self):
        payload = {
            "kind": self.kind,
            "batch_size": self.batch_size,
            "acquisition": self.acquisition,
            "beta": self.beta,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "mc_samples": self.mc_samples,
            "reference_margin": self.reference_margin,
            "candidate_count": self.candidate_count,
            "optimizer": self.optimizer.to_json(),
        }
        return payload

    @classmethod
    def from_json(cls, payload):
        payload = dict(payload)
        optimizer = payload.pop("optimizer", None)
        if optimizer is not None:
            payload["optimizer"] = OptimizerConfig.from_json(optimizer)
        return cls(**payload)


def optimize_acquisition(space, fun, grad, config=None, seed=0):
    """Maximize a batched acquisition over the box.

    ``fun`` maps an (n, D) matrix to n values; ``grad`` maps a single point
    to its gradient. Screens quasi-random presamples, ascends from the
    ``num_starts`` best with the projected quasi-Newton routine, and returns
    ``(point, value)`` for the best terminal point. The value never falls
    below the best finite presample. Starts where ``fun`` is non-finite are
    dropped; if everything is non-finite the acquisition is unusable and an
    error is raised.
    """
    if config is None:
        config = OptimizerConfig()
    check_seed(seed)
    presamples = space.sample(config.resolved_presamples(space.dimension), mode="quasirandom")
    values = np.asarray(fun(presamples), dtype=float)
    finite = np.isfinite(values)
    if not finite.any():
        raise OptimizationError("acquisition returned no finite value on the presamples")
    order = np.argsort(-np.where(finite, values, -np.inf), kind="stable")
    order = order[finite[order]][: config.num_starts]

    def negated(x):
        return -float(fun(x[None, :])[0])

    def negated_grad(x):
        return -np.asarray(grad(x), dtype=float)

    best_point = None
    best_value = -np.inf
    for index in order:
        outcome = minimize_lbfgs_box(
            negated,
            negated_grad,
            presamples[index],
            space.lower,
            space.upper,
            memory=config.memory,
            max_iterations=config.max_iterations,
            gradient_tolerance=config.gradient_tolerance,
        )
        if not outcome.usable:
            continue
        value = -outcome.value
        if value > best_value:
            best_value = value
            best_point = np.clip(outcome.point, space.lower, space.upper)
    if best_point is None:
        raise OptimizationError("every ascent start was discarded")
    return best_point, float(best_value)


def _objective_tags(datasets):
    """Tags carrying objective values: either OBJECTIVE or OBJECTIVE_<i>."""
    tags = [t for t in sorted(datasets.tags()) if t == OBJECTIVE or t.startswith("OBJECTIVE")]
    if not tags:
        raise ConfigError("no objective tag present in the session data")
    return tags


def _require(models, tag):
    if tag not in models:
        raise ConfigError(f"rule needs a fitted model for tag {tag!r}")
    return models[tag]


def _posterior_objective(model, value_fn):
    """Lift a (mean, variance) criterion to point space with chain rule."""

    def fun(points):
        prediction = model.predict(points)
        return value_fn(prediction.mean, prediction.variance)[0]

    def grad(x):
        prediction = model.predict(x[None, :])
        _, d_mean, d_variance = value_fn(prediction.mean, prediction.variance)
        mean_grad, variance_grad = model.predict_gradient(x)
        return float(d_mean[0]) * mean_grad + float(d_variance[0]) * variance_grad

    return fun, grad


def _noisy_incumbent(model):
    """Risk-averse effective best: min over training rows of mean + sd."""
    prediction = model.predict(model.training_data.query_points)
    return float(np.min(prediction.mean + np.sqrt(prediction.variance)))


def _cei_objective(objective_model, constraint_models, threshold, eta):
    """EI times the product of feasibility probabilities.

    ``eta=None`` means nothing feasible has been seen, so the product of
    feasibility probabilities stands alone.
    """

    def parts(points):
        prediction = objective_model.predict(points)
        if eta is None:
            ei = np.ones(points.shape[0])
        else:
            context = AcquisitionContext(eta=eta)
            ei = expected_improvement(prediction.mean, prediction.variance, context)[0]
        pofs = []
        for model in constraint_models:
            p = model.predict(points)
            pofs.append(probability_of_feasibility(p.mean, p.variance, threshold)[0])
        return ei, pofs

    def fun(points):
        ei, pofs = parts(points)
        total = ei.copy()
        for p in pofs:
            total = total * p
        return total

    def grad(x):
        row = x[None, :]
        if eta is None:
            ei = np.ones(1)
            ei_grad = np.zeros_like(x)
        else:
            context = AcquisitionContext(eta=eta)
            prediction = objective_model.predict(row)
            value, d_mean, d_variance = expected_improvement(
                prediction.mean, prediction.variance, context
            )
            mean_grad, variance_grad = objective_model.predict_gradient(x)
            ei = value
            ei_grad = float(d_mean[0]) * mean_grad + float(d_variance[0]) * variance_grad
        factors = [float(ei[0])]
        grads = [ei_grad]
        for model in constraint_models:
            prediction = model.predict(row)
            value, d_mean, d_variance = probability_of_feasibility(
                prediction.mean, prediction.variance, threshold
            )
            mean_grad, variance_grad = model.predict_gradient(x)
            factors.append(float(value[0]))
            grads.append(float(d_mean[0]) * mean_grad + float(d_variance[0]) * variance_grad)
        total = np.zeros_like(x)
        for i, g in enumerate(grads):
            rest = 1.0
            for j, f in enumerate(factors):
                if j != i:
                    rest *= f
            total += rest * g
        return total

    return fun, grad


def _ehvi_reference(observations, margin):
    top = observations.max(axis=0)
    span = np.ptp(observations, axis=0)
    span = np.where(span > 0.0, span, 1.0)
    return top + margin * span


def _ehvi_objective(first_model, second_model, front, mc, seed):
    def posteriors(points):
        p0 = first_model.predict(points)
        p1 = second_model.predict(points)
        means = np.column_stack([p0.mean, p1.mean])
        variances = np.column_stack([p0.variance, p1.variance])
        return means, variances

    def fun(points):
        means, variances = posteriors(points)
        return ehvi_mc(means, variances, front, mc=mc, seed=seed)[0]

    def grad(x):
        means, variances = posteriors(x[None, :])
        _, d_mean, d_variance = ehvi_mc(means[0], variances[0], front, mc=mc, seed=seed)
        g0_mean, g0_variance = first_model.predict_gradient(x)
        g1_mean, g1_variance = second_model.predict_gradient(x)
        return (
            d_mean[0] * g0_mean
            + d_variance[0] * g0_variance
            + d_mean[1] * g1_mean
            + d_variance[1] * g1_variance
        )

    return fun, grad


def build_objective(space, models, datasets, config, seed):
    """The (batched value, single-point gradient) pair for the configured acquisition."""
    name = config.acquisition
    if name == "ehvi":
        tags = _objective_tags(datasets)
        if len(tags) != 2:
            raise ConfigError("ehvi needs exactly two objective tags")
        observations = np.column_stack(
            [datasets[tags[0]].observations[:, 0], datasets[tags[1]].observations[:, 0]]
        )
        reference = _ehvi_reference(observations, config.reference_margin)
        front = pareto_front(observations, reference)
        return _ehvi_objective(
            _require(models, tags[0]),
            _require(models, tags[1]),
            front,
            config.mc_samples,
            seed,
        )
    if name == "cei":
        objective_model = _require(models, OBJECTIVE)
        constraint_tags = sorted(t for t in datasets.tags() if t != OBJECTIVE)
        if not constraint_tags:
            raise ConfigError("cei needs at least one constraint tag")
        constraint_models = [_require(models, t) for t in constraint_tags]
        objective_values = datasets[OBJECTIVE].observations[:, 0]
        feasible = np.ones(len(objective_values), dtype=bool)
        for tag in constraint_tags:
            feasible &= datasets[tag].observations[:, 0] <= config.threshold
        eta = float(objective_values[feasible].min()) if feasible.any() else None
        return _cei_objective(objective_model, constraint_models, config.threshold, eta)

    model = _require(models, OBJECTIVE)
    if name == "ei":
        context = AcquisitionContext(eta=float(datasets[OBJECTIVE].observations[:, 0].min()))
        return _posterior_objective(model, lambda m, v: expected_improvement(m, v, context))
    if name == "aei":
        context = AcquisitionContext(eta=_noisy_incumbent(model))
        noise = model.hyperparameters.noise_variance
        return _posterior_objective(
            model, lambda m, v: augmented_expected_improvement(m, v, noise, context)
        )
    if name == "nlcb":
        context = AcquisitionContext(eta=0.0, beta=config.beta)
        return _posterior_objective(
            model, lambda m, v: negative_lower_confidence_bound(m, v, context)
        )
    if name == "ef":
        level = LevelSetConfig(threshold=config.threshold, alpha=config.alpha)
        return _posterior_objective(model, lambda m, v: expected_feasibility(m, v, level))
    if name == "var":
        return _posterior_objective(model, predictive_variance)
    raise ConfigError(f"acquisition {name!r} has no continuous objective")


def ego_step(space, models, datasets, config, seed):
    """One EGO recommendation: plain argmax, then greedy penalized re-argmaxes.

    Returns a (batch_size, D) matrix. The first row is always the bare
    acquisition argmax, so a batch run shares its first point with the
    single-point run at the same seed.
    """
    fun, grad = build_objective(space, models, datasets, config, seed)
    first, _ = optimize_acquisition(space, fun, grad, config.optimizer, seed)
    points = [first]
    if config.batch_size > 1:
        if config.acquisition == "ehvi":
            raise ConfigError("penalized batches are not defined for ehvi")
        model = _require(models, OBJECTIVE)
        lipschitz = estimate_lipschitz(model, space)
        incumbent = float(datasets[OBJECTIVE].observations[:, 0].min())
        for _ in range(1, config.batch_size):
            state = PenalizationState(lipschitz, incumbent, np.asarray(points))

            def pen_fun(candidates, state=state):
                return log_softplus(fun(candidates)) + log_penalty(candidates, model, state)

            def pen_grad(x, state=state):
                base = float(fun(x[None, :])[0])
                chain = log_softplus_gradient(base) * grad(x)
                return chain + log_penalty_gradient(x, model, state)[1]

            chosen, _ = optimize_acquisition(space, pen_fun, pen_grad, config.optimizer, seed)
            points.append(chosen)
    return np.asarray(points)


@dataclass(frozen=True, eq=False)
class TrustRegionState:
    """Where TREGO currently searches and how it reacts to the next result."""

    phase: str
    center: np.ndarray
    size: np.ndarray
    best_seen: float
    min_size: np.ndarray
    gamma_shrink: float = 0.5
    gamma_expand: float = 2.0

    def __post_init__(self):
        if self.phase not in ("global", "local"):
            raise ValidationError("phase must be 'global' or 'local'", field="phase")
        center = np.asarray(self.center, dtype=float)
        size = np.asarray(self.size, dtype=float)
        min_size = np.asarray(self.min_size, dtype=float)
        if not np.all(size > 0) or not np.all(min_size > 0):
            raise ValidationError("trust-region sizes must be positive", field="size")
        if not (0 < self.gamma_shrink < 1):
            raise ValidationError("gamma_shrink must lie in (0, 1)", field="gamma_shrink")
        if not self.gamma_expand > 1:
            raise ValidationError("gamma_expand must exceed 1", field="gamma_expand")
        for name, value in (("center", center), ("size", size), ("min_size", min_size)):
            value = value.copy()
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    def __eq__(self, other):
        if not isinstance(other, TrustRegionState):
            return NotImplemented
        return (
            self.phase == other.phase
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.size, other.size)
            and self.best_seen == other.best_seen
            and np.array_equal(self.min_size, other.min_size)
            and self.gamma_shrink == other.gamma_shrink
            and self.gamma_expand == other.gamma_expand
        )

    def to_json(self):
        return {
            "phase": self.phase,
            "center": self.center.tolist(),
            "size": self.size.tolist(),
            "best_seen": self.best_seen,
            "min_size": self.min_size.tolist(),
            "gamma_shrink": self.gamma_shrink,
            "gamma_expand": self.gamma_expand,
        }

    @classmethod
    def from_json(cls, payload):
        return cls(**payload)


def initial_trust_region(space, dataset):
    """Fresh TREGO state: global phase, centered on the incumbent."""
    _, best_point, best_value = dataset.best_observation()
    widths = space.widths
    return TrustRegionState(
        phase="global",
        center=best_point,
        size=0.25 * widths,
        best_seen=best_value,
        min_size=1e-3 * widths,
    )


def trego_step(space, models, datasets, state, config, seed):
    """One TREGO recommendation; the automaton itself advances on tell-back."""
    region = space
    if state.phase == "local":
        region = space.shrink_to_region(state.center, state.size)
    fun, grad = build_objective(space, models, datasets, config, seed)
    point, _ = optimize_acquisition(region, fun, grad, config.optimizer, seed)
    return point[None, :], state


def trego_update(state, space, best_point, best_value):
    """Advance the success/failure automaton after new observations arrive."""
    if best_value < state.best_seen - _SUCCESS_MARGIN:
        return replace(
            state,
            phase="local",
            center=np.asarray(best_point, dtype=float),
            size=np.minimum(state.gamma_expand * state.size, space.widths),
            best_seen=best_value,
        )
    if state.phase == "local":
        shrunk = state.gamma_shrink * state.size
        if np.all(shrunk < state.min_size):
            return replace(state, phase="global", size=0.25 * space.widths)
        return replace(state, size=shrunk)
    return replace(state, phase="local")


def thompson_step(space, model, config, seed):
    """Argmin locations of joint posterior draws over a quasi-random candidate set."""
    check_seed(seed)
    count = config.resolved_candidates(space.dimension)
    if count < config.batch_size:
        raise ConfigError("candidate_count must be at least batch_size")
    candidates = space.sample(count, mode="quasirandom")
    draws = model.sample(candidates, config.batch_size, seed)
    picks = np.argmin(draws, axis=1)
    return candidates[picks]
