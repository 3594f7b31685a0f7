"""askopt: modular Bayesian optimization and active learning.

The pieces compose bottom-up: spaces hold the search domain, datasets hold
tagged observations, models fit Gaussian-process surrogates, acquisition
functions score candidate queries, rules turn scores into recommended
points, and the loop glues everything into ask-tell sessions and closed-loop
runs. bench, cli, and service wrap the loop for experiments and remote use.
"""

from ._backend import BACKEND
from .data import CONSTRAINT, OBJECTIVE, Dataset, TaggedDatasets, deserialize, serialize
from .errors import (
    AskoptError,
    ConfigError,
    DimensionMismatchError,
    ModelFitError,
    NotPositiveDefiniteError,
    OptimizationError,
    SerializationError,
    ValidationError,
)
from .loop import AskTellSession, Record, RunResult, drive, expected_tags, run
from .models import (
    FitConfig,
    GPHyperparameters,
    GPModel,
    Kernel,
    MATERN52,
    SQUARED_EXPONENTIAL,
    fit,
    kernel_matrix,
    log_marginal_likelihood,
)
from .rules import (
    ACQUISITION_NAMES,
    OptimizerConfig,
    RULE_KINDS,
    RuleConfig,
    TrustRegionState,
    ego_step,
    optimize_acquisition,
    thompson_step,
    trego_step,
    trego_update,
)
from .spaces import BoxSpace

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # spaces and data
    "BoxSpace",
    "Dataset",
    "TaggedDatasets",
    "OBJECTIVE",
    "CONSTRAINT",
    "serialize",
    "deserialize",
    # models
    "Kernel",
    "GPHyperparameters",
    "GPModel",
    "FitConfig",
    "fit",
    "kernel_matrix",
    "log_marginal_likelihood",
    "SQUARED_EXPONENTIAL",
    "MATERN52",
    # rules
    "RuleConfig",
    "OptimizerConfig",
    "TrustRegionState",
    "ACQUISITION_NAMES",
    "RULE_KINDS",
    "optimize_acquisition",
    "ego_step",
    "trego_step",
    "trego_update",
    "thompson_step",
    # loop
    "AskTellSession",
    "Record",
    "RunResult",
    "run",
    "drive",
    "expected_tags",
    # errors
    "AskoptError",
    "ValidationError",
    "DimensionMismatchError",
    "SerializationError",
    "ConfigError",
    "OptimizationError",
    "ModelFitError",
    "NotPositiveDefiniteError",
]
