"""Deterministic seed derivation.

Every stochastic operation takes an explicit 64-bit seed. Sub-streams are
derived by hashing a path of integers onto the base seed, so the same
(seed, path) pair always yields the same stream regardless of call order.
"""

import numpy as np

from .errors import ValidationError

MAX_SEED = 2**64 - 1


def check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ValidationError(f"seed must be an integer, got {type(seed).__name__}")
    if not 0 <= int(seed) <= MAX_SEED:
        raise ValidationError("seed must fit in an unsigned 64-bit integer")
    return int(seed)


def derive_seed(base, *path):
    """Hash (base, *path) into a fresh 64-bit seed."""
    entropy = [check_seed(base)] + [check_seed(p) for p in path]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def rng_from(seed, *path):
    if path:
        seed = derive_seed(seed, *path)
    else:
        seed = check_seed(seed)
    return np.random.default_rng(seed)
