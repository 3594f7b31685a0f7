"""Kernel-evaluation backend selection.

The compiled extension is preferred when importable. Set
``ASKOPT_BACKEND=numpy`` to force the pure-Python fallback, or
``ASKOPT_BACKEND=native`` to make a missing extension a hard error.
"""

import os

from . import numpy_impl

_requested = os.environ.get("ASKOPT_BACKEND", "").strip().lower()

if _requested not in ("", "native", "numpy"):
    raise RuntimeError(f"ASKOPT_BACKEND must be 'native' or 'numpy', got {_requested!r}")

if _requested == "numpy":
    _impl = numpy_impl
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "native":
            raise
        _impl = numpy_impl

BACKEND = _impl.NAME

scaled_sqdist = _impl.scaled_sqdist
kernel_se = _impl.kernel_se
kernel_matern52 = _impl.kernel_matern52
