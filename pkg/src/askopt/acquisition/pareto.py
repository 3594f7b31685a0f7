"""Two-objective Pareto fronts, exact hypervolume, and Monte-Carlo EHVI.

Everything minimizes. The front is the maximal mutually non-dominated subset
of the observations that lie strictly below the reference point in both
coordinates; points at or beyond the reference can never contribute
dominated volume, so dropping them changes nothing downstream.
"""

from dataclasses import dataclass

import numpy as np

from .._seeding import check_seed, rng_from
from ..errors import ValidationError

__all__ = [
    "ParetoFront",
    "pareto_front",
    "hypervolume",
    "hypervolume_improvement",
    "ehvi_mc",
]

_EHVI_CHUNK = 256


@dataclass(frozen=True, eq=False)
class ParetoFront:
    """Non-dominated points (P x 2, sorted by first objective) plus reference."""

    points: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2).copy()
        ref = np.asarray(self.reference, dtype=float).reshape(-1).copy()
        if ref.shape != (2,) or not np.all(np.isfinite(ref)):
            raise ValidationError("reference must be two finite reals", field="reference")
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValidationError("front points must be finite", field="points")
        if pts.size and not np.all(pts < ref):
            raise ValidationError(
                "every front point must lie strictly below the reference", field="points"
            )
        if pts.shape[0] > 1:
            if np.any(np.diff(pts[:, 0]) <= 0) or np.any(np.diff(pts[:, 1]) >= 0):
                raise ValidationError(
                    "front must be sorted ascending in objective 0 and strictly "
                    "descending in objective 1",
                    field="points",
                )
        pts.setflags(write=False)
        ref.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "reference", ref)

    @property
    def size(self):
        return self.points.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ParetoFront):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.reference, other.reference
        )


def pareto_front(observations, reference):
    """Maximal non-dominated subset of ``observations`` below ``reference``.

    Duplicates collapse to one representative; the order of input rows never
    matters. For two objectives a single sort plus sweep suffices.
    """
    obs = np.asarray(observations, dtype=float)
    if obs.size == 0:
        obs = obs.reshape(0, 2)
    if obs.ndim != 2 or obs.shape[1] != 2:
        raise ValidationError("observations must be an N x 2 matrix", field="observations")
    reference = np.asarray(reference, dtype=float).reshape(-1)
    mask = np.all(obs < reference, axis=1)
    candidates = np.unique(obs[mask], axis=0)  # sorts by obj0 then obj1
    keep = []
    best_second = np.inf
    for row in candidates:
        if row[1] < best_second:
            keep.append(row)
            best_second = row[1]
    pts = np.asarray(keep, dtype=float).reshape(-1, 2)
    return ParetoFront(pts, reference)


def hypervolume(front):
    """Area dominated by the front and bounded above by its reference."""
    pts = front.points
    if pts.shape[0] == 0:
        return 0.0
    edges = np.append(pts[1:, 0], front.reference[0])
    return float(np.sum((edges - pts[:, 0]) * (front.reference[1] - pts[:, 1])))


def hypervolume_improvement(front, candidates):
    """Added hypervolume if each candidate row joined the front, plus gradients.

    Returns ``(improvement, d/dy0, d/dy1)``, each shaped like the candidate
    count. Dominated candidates (and anything at or beyond the reference)
    score zero. The gradient at staircase kinks uses the one-sided limit.
    """
    y = np.asarray(candidates, dtype=float).reshape(-1, 2)
    r0, r1 = front.reference
    inside = (y[:, 0] < r0) & (y[:, 1] < r1)
    y0 = y[:, 0][:, None]
    y1 = y[:, 1][:, None]

    if front.size:
        f0 = front.points[:, 0][None, :]
        f1 = front.points[:, 1][None, :]
        a = np.maximum(f0, y0)  # (n, P), nondecreasing along P
        b = np.maximum(f1, y1)  # (n, P), nonincreasing along P
        a_next = np.concatenate([a[:, 1:], np.full_like(y0, r0)], axis=1)
        widths = a_next - a
        heights = r1 - b
        overlap = np.sum(widths * heights, axis=1)
        grow0 = (y0 > f0).astype(float)
        grow0_next = np.concatenate([grow0[:, 1:], np.zeros_like(y0)], axis=1)
        d_overlap0 = np.sum((grow0_next - grow0) * heights, axis=1)
        d_overlap1 = -np.sum(widths * (y1 > f1), axis=1)
    else:
        overlap = np.zeros(y.shape[0])
        d_overlap0 = np.zeros(y.shape[0])
        d_overlap1 = np.zeros(y.shape[0])

    box = (r0 - y[:, 0]) * (r1 - y[:, 1])
    value = np.where(inside, box - overlap, 0.0)
    value = np.maximum(value, 0.0)
    d0 = np.where(inside, -(r1 - y[:, 1]) - d_overlap0, 0.0)
    d1 = np.where(inside, -(r0 - y[:, 0]) - d_overlap1, 0.0)
    return value, d0, d1


def ehvi_mc(mean, variance, front, mc=4096, seed=0):
    """Monte-Carlo expected hypervolume improvement for independent marginals.

    ``mean`` and ``variance`` hold the two per-objective posteriors at each
    candidate, shaped (n, 2) or (2,). One set of ``mc`` standard-normal draws
    is shared across candidates (common random numbers), which makes the
    estimate deterministic in ``seed`` and smooth in the inputs; the returned
    mean/variance gradients come from the same reparameterized draws.
    """
    check_seed(seed)
    if mc < 1:
        raise ValidationError("mc must be at least 1", field="mc")
    mean = np.asarray(mean, dtype=float)
    single = mean.ndim == 1
    mean = mean.reshape(-1, 2)
    variance = np.asarray(variance, dtype=float).reshape(-1, 2)
    if variance.shape != mean.shape:
        raise ValidationError("mean and variance shapes differ", field="variance")
    sd = np.sqrt(np.maximum(variance, 0.0))
    z = rng_from(seed).standard_normal((int(mc), 2))

    n = mean.shape[0]
    value = np.empty(n)
    d_mean = np.empty((n, 2))
    d_sd = np.empty((n, 2))
    for start in range(0, n, _EHVI_CHUNK):
        stop = min(start + _EHVI_CHUNK, n)
        block = slice(start, stop)
        # (chunk, mc, 2) reparameterized draws
        samples = mean[block, None, :] + sd[block, None, :] * z[None, :, :]
        imp, g0, g1 = hypervolume_improvement(front, samples.reshape(-1, 2))
        imp = imp.reshape(stop - start, int(mc))
        g0 = g0.reshape(stop - start, int(mc))
        g1 = g1.reshape(stop - start, int(mc))
        value[block] = imp.mean(axis=1)
        d_mean[block, 0] = g0.mean(axis=1)
        d_mean[block, 1] = g1.mean(axis=1)
        d_sd[block, 0] = (g0 * z[:, 0]).mean(axis=1)
        d_sd[block, 1] = (g1 * z[:, 1]).mean(axis=1)

    safe_sd = np.where(sd < 1e-12, 1.0, sd)
    d_variance = np.where(sd < 1e-12, 0.0, d_sd / (2.0 * safe_sd))
    if single:
        return value[0], d_mean[0], d_variance[0]
    return value, d_mean, d_variance
