"""Hot-kernel dispatch: compiled Cython core when built, numpy fallback otherwise.

Set ``DYADIC_SHARP_PURE=1`` to force the numpy path.  The compiled
kernels only take contiguous 1-D float64 input; batched (2-D) calls always
use numpy.
"""

import os

import numpy as np

from . import _kernels_py as _py

try:
    if os.environ.get("DYADIC_SHARP_PURE"):
        raise ImportError("pure mode requested")
    from . import _ckernels as _c
except ImportError:
    _c = None

BACKEND = "cython" if _c is not None else "python"


def available_backends():
    return ["python"] + (["cython"] if _c is not None else [])


def _impl(name, x, backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython" and _c is not None and np.ndim(x) == 1:
        return getattr(_c, name)
    if backend not in ("python", "cython"):
        raise ValueError(f"unknown backend {backend!r}")
    return getattr(_py, name)


def _vec(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def haar_forward(cells, backend=None):
    x = _vec(cells)
    return _impl("haar_forward", x, backend)(x)


def haar_inverse(coeffs, backend=None):
    c = _vec(coeffs)
    return _impl("haar_inverse", c, backend)(c)


def scatter_shift(coeffs, src, dst, amp, backend=None):
    c = _vec(coeffs)
    fn = _impl("scatter_shift", c, backend)
    return fn(c, np.ascontiguousarray(src, dtype=np.int64),
              np.ascontiguousarray(dst, dtype=np.int64), _vec(amp))


def block_oscillation(sorted_blocks, keep, backend=None):
    s = _vec(sorted_blocks)
    if backend is None:
        backend = BACKEND
    if backend == "cython" and _c is not None and s.ndim == 2:
        return _c.block_oscillation(s, int(keep))
    return _py.block_oscillation(s, int(keep))


def maximal_chain(level_values, backend=None):
    if backend is None:
        backend = BACKEND
    if backend == "cython" and _c is not None and np.ndim(level_values[-1]) == 1:
        return _c.maximal_chain(level_values)
    return _py.maximal_chain(level_values)
