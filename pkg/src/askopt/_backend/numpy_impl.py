"""Pure-numpy implementations of the hot kernels.

Used whenever the compiled extension is unavailable or explicitly disabled
via ``ASKOPT_BACKEND=numpy``.
"""

import numpy as np

NAME = "numpy"

_SQRT5 = 2.23606797749979


def scaled_sqdist(a, b, lengthscales):
    """Pairwise squared distances after dividing each axis by its lengthscale."""
    a = np.asarray(a, dtype=np.float64) / lengthscales
    b = np.asarray(b, dtype=np.float64) / lengthscales
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    d2 = aa + bb - 2.0 * (a @ b.T)
    # cancellation can leave tiny negatives for near-identical rows
    return np.maximum(d2, 0.0)


def kernel_se(a, b, variance, lengthscales):
    d2 = scaled_sqdist(a, b, lengthscales)
    return variance * np.exp(-0.5 * d2)


def kernel_matern52(a, b, variance, lengthscales):
    d2 = scaled_sqdist(a, b, lengthscales)
    r = np.sqrt(d2)
    return variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * d2) * np.exp(-_SQRT5 * r)
