"""Continuous box search spaces: membership, sampling, trust-region sub-boxes."""

import warnings

import numpy as np
from scipy.stats import qmc

from .errors import DimensionMismatchError, ValidationError
from ._seeding import check_seed, rng_from

__all__ = ["BoxSpace"]


class BoxSpace:
    """A closed axis-aligned box ``[lower, upper]`` in D dimensions.

    Immutable after construction; instances are safe to share between
    threads. Both bounds are attainable points (closed on both ends), so
    optimizer clipping lands exactly on the boundary.
    """

    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.ndim != 1 or upper.ndim != 1:
            raise ValidationError("bounds must be one-dimensional", field="lower/upper")
        if lower.shape != upper.shape:
            raise DimensionMismatchError(lower.shape[0], upper.shape[0], "upper bound")
        if lower.size < 1:
            raise ValidationError("space must have at least one dimension", field="lower")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValidationError("bounds must be finite", field="lower/upper")
        if not np.all(lower < upper):
            bad = int(np.argmin(upper - lower))
            raise ValidationError(
                f"lower[{bad}] must be strictly below upper[{bad}]", field="lower/upper"
            )
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __setattr__(self, name, value):
        raise AttributeError("BoxSpace is immutable")

    @property
    def dimension(self):
        return self.lower.shape[0]

    @property
    def widths(self):
        return self.upper - self.lower

    def __repr__(self):
        return f"BoxSpace(lower={self.lower.tolist()}, upper={self.upper.tolist()})"

    def __eq__(self, other):
        if not isinstance(other, BoxSpace):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(
            self.upper, other.upper
        )

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))

    def contains(self, x):
        """True iff ``x`` lies inside the closed box."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dimension:
            got = x.shape[0] if x.ndim == 1 else x.shape
            raise DimensionMismatchError(self.dimension, got, "point")
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, n, mode="uniform", seed=0):
        """Draw ``n`` points inside the box as an (n, D) array.

        ``uniform`` draws i.i.d. uniform points from the stream determined by
        ``seed``. ``quasirandom`` returns a Sobol sequence scaled to the box,
        with the all-zeros first element skipped so multi-start optimizers do
        not all anchor on a corner; it does not depend on the seed.
        """
        check_seed(seed)
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 0:
            raise ValidationError("sample count must be a non-negative integer", field="n")
        n = int(n)
        if mode == "uniform":
            unit = rng_from(seed).random((n, self.dimension))
        elif mode == "quasirandom":
            engine = qmc.Sobol(d=self.dimension, scramble=False)
            engine.fast_forward(1)
            with warnings.catch_warnings():
                # balance warning for non-power-of-two draws is expected here
                warnings.simplefilter("ignore", UserWarning)
                unit = engine.random(n)
        else:
            raise ValidationError(f"unknown sample mode {mode!r}", field="mode")
        return self.lower + unit * self.widths

    def shrink_to_region(self, center, halfwidths):
        """Intersect ``[center - halfwidths, center + halfwidths]`` with the box."""
        center = np.asarray(center, dtype=float)
        halfwidths = np.asarray(halfwidths, dtype=float)
        if halfwidths.ndim != 1 or halfwidths.shape[0] != self.dimension:
            got = halfwidths.shape[0] if halfwidths.ndim == 1 else halfwidths.shape
            raise DimensionMismatchError(self.dimension, got, "halfwidths")
        if not self.contains(center):
            raise ValidationError("region center must lie inside the space", field="center")
        if not np.all(halfwidths > 0):
            raise ValidationError("halfwidths must be strictly positive", field="halfwidths")
        return BoxSpace(
            np.maximum(self.lower, center - halfwidths),
            np.minimum(self.upper, center + halfwidths),
        )

    def to_json(self):
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_json(cls, payload):
        if not isinstance(payload, dict) or set(payload) != {"lower", "upper"}:
            raise ValidationError(
                'space payload must be {"lower": [...], "upper": [...]}', field="space"
            )
        return cls(payload["lower"], payload["upper"])
