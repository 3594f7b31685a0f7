"""Local penalization for greedy batch construction.

Each already-chosen batch point x_j carries a penalty factor

    psi_j(x) = Phi((L * ||x - x_j|| - (mu(x_j) - M)) / sqrt(2 * s2(x_j)))

where L is a Lipschitz estimate for the objective and M the incumbent
minimum. The factor vanishes inside the ball around x_j that the Lipschitz
bound says could still contain the minimum, and tends to one far away. The
penalized criterion is softplus(acquisition) * prod_j psi_j, always handled
in log-space.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from ..errors import ValidationError

__all__ = [
    "PenalizationState",
    "estimate_lipschitz",
    "local_penalizer",
    "log_penalty",
    "log_penalty_gradient",
    "log_softplus",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_DEGENERATE_SD = 1e-12


@dataclass(frozen=True, eq=False)
class PenalizationState:
    """Lipschitz constant, incumbent minimum, and the pending batch points."""

    lipschitz: float
    incumbent_min: float
    pending: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.lipschitz) and self.lipschitz > 0):
            raise ValidationError("lipschitz must be positive", field="lipschitz")
        if not np.isfinite(self.incumbent_min):
            raise ValidationError("incumbent_min must be finite", field="incumbent_min")
        pending = np.asarray(self.pending, dtype=float)
        if pending.ndim != 2:
            raise ValidationError("pending must be a B x D matrix", field="pending")
        pending = pending.copy()
        pending.setflags(write=False)
        object.__setattr__(self, "pending", pending)


def estimate_lipschitz(model, space, n=500, floor=1e-4):
    """Max posterior-mean gradient norm over a quasi-random scan, floored."""
    points = space.sample(n, mode="quasirandom")
    best = floor
    for row in points:
        d_mean, _ = model.predict_gradient(row)
        best = max(best, float(np.linalg.norm(d_mean)))
    return best


def _penalty_pieces(points, model, state):
    """z_j for every (point, pending_j) pair, plus the pending posteriors."""
    pending = state.pending
    prediction = model.predict(pending)
    sd = np.sqrt(np.maximum(prediction.variance, 0.0))
    gaps = prediction.mean - state.incumbent_min  # how much worse than incumbent
    diffs = points[:, None, :] - pending[None, :, :]
    dists = np.sqrt(np.sum(diffs * diffs, axis=2))  # (n, B)
    return dists, gaps, sd


def local_penalizer(x, pending_j, model, state):
    """Penalty factor in (0, 1] contributed by one pending point."""
    x = np.asarray(x, dtype=float)
    pending_j = np.asarray(pending_j, dtype=float)
    prediction = model.predict(pending_j[None, :])
    sd = float(np.sqrt(max(prediction.variance[0], 0.0)))
    gap = float(prediction.mean[0]) - state.incumbent_min
    dist = float(np.linalg.norm(x - pending_j))
    if sd < _DEGENERATE_SD:
        return float(state.lipschitz * dist >= gap)
    z = (state.lipschitz * dist - gap) / (math.sqrt(2.0) * sd)
    return float(ndtr(z))


def log_penalty(points, model, state):
    """Sum over pending points of log psi_j, for each row of ``points``."""
    points = np.asarray(points, dtype=float)
    if state.pending.shape[0] == 0:
        return np.zeros(points.shape[0])
    dists, gaps, sd = _penalty_pieces(points, model, state)
    degenerate = sd < _DEGENERATE_SD
    safe_sd = np.where(degenerate, 1.0, sd)
    z = (state.lipschitz * dists - gaps[None, :]) / (math.sqrt(2.0) * safe_sd[None, :])
    logs = log_ndtr(z)
    if degenerate.any():
        hard = np.where(
            state.lipschitz * dists[:, degenerate] >= gaps[None, degenerate], 0.0, -np.inf
        )
        logs[:, degenerate] = hard
    return np.sum(logs, axis=1)


def log_penalty_gradient(x, model, state):
    """(sum_j log psi_j, gradient w.r.t. x) at a single point."""
    x = np.asarray(x, dtype=float)
    if state.pending.shape[0] == 0:
        return 0.0, np.zeros_like(x)
    dists, gaps, sd = _penalty_pieces(x[None, :], model, state)
    dists = dists[0]
    degenerate = sd < _DEGENERATE_SD
    safe_sd = np.where(degenerate, 1.0, sd)
    scale = math.sqrt(2.0) * safe_sd
    z = (state.lipschitz * dists - gaps) / scale
    logs = log_ndtr(z)
    # d log Phi(z) / dz = phi(z) / Phi(z), stable via the log form
    ratio = np.exp(-0.5 * z * z - logs) * _INV_SQRT_2PI
    safe_dist = np.where(dists < 1e-300, 1.0, dists)
    coeff = np.where(dists < 1e-300, 0.0, ratio * state.lipschitz / (scale * safe_dist))
    if degenerate.any():
        logs[degenerate] = np.where(
            state.lipschitz * dists[degenerate] >= gaps[degenerate], 0.0, -np.inf
        )
        coeff[degenerate] = 0.0
    grad = (coeff[:, None] * (x[None, :] - state.pending)).sum(axis=0)
    return float(np.sum(logs)), grad


def log_softplus(value):
    """log(log(1 + exp(value))) computed without overflow at either tail."""
    value = np.asarray(value, dtype=float)
    softplus = np.logaddexp(0.0, value)
    return np.log(softplus)


def log_softplus_gradient(value):
    """d log softplus / d value = sigmoid(value) / softplus(value)."""
    value = np.asarray(value, dtype=float)
    softplus = np.logaddexp(0.0, value)
    # sigmoid(v) = exp(v - softplus(v)); both factors are overflow-safe
    return np.exp(value - softplus) / softplus
