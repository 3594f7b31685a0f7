"""Acquisition criteria: values with gradients, maximized over the space."""

from .functions import (
    AcquisitionContext,
    LevelSetConfig,
    augmented_expected_improvement,
    expected_feasibility,
    expected_improvement,
    negative_lower_confidence_bound,
    predictive_variance,
    probability_of_feasibility,
)
from .pareto import (
    ParetoFront,
    ehvi_mc,
    hypervolume,
    hypervolume_improvement,
    pareto_front,
)
from .penalization import (
    PenalizationState,
    estimate_lipschitz,
    local_penalizer,
    log_penalty,
    log_penalty_gradient,
    log_softplus,
    log_softplus_gradient,
)

__all__ = [
    "AcquisitionContext",
    "LevelSetConfig",
    "expected_improvement",
    "augmented_expected_improvement",
    "negative_lower_confidence_bound",
    "probability_of_feasibility",
    "expected_feasibility",
    "predictive_variance",
    "ParetoFront",
    "pareto_front",
    "hypervolume",
    "hypervolume_improvement",
    "ehvi_mc",
    "PenalizationState",
    "estimate_lipschitz",
    "local_penalizer",
    "log_penalty",
    "log_penalty_gradient",
    "log_softplus",
    "log_softplus_gradient",
]
