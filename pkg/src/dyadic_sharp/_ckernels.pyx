# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py`` (1-D inputs only)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


def haar_forward(const double[::1] x):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t half, i, level
    cdef double scale
    out_arr = np.empty(n, dtype=np.float64)
    work_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] s = work_arr
    cdef double inv_n = 1.0 / n
    for i in range(n):
        s[i] = x[i] * inv_n
    half = n // 2
    level = 0
    while (1 << level) < half:
        level += 1
    while half >= 1:
        scale = pow(2.0, level / 2.0)
        for i in range(half):
            out[half + i] = (s[2 * i] - s[2 * i + 1]) * scale
            s[i] = s[2 * i] + s[2 * i + 1]
        half //= 2
        level -= 1
    out[0] = s[0]
    return out_arr


def haar_inverse(const double[::1] c):
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t width, i, level
    cdef double amp, a, scale
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    out[0] = c[0]
    width = 1
    level = 0
    while width < n:
        # expand in place from the back so parents are read before overwrite
        scale = pow(2.0, level / 2.0)
        i = width - 1
        while i >= 0:
            a = out[i]
            amp = c[width + i] * scale
            out[2 * i] = a + amp
            out[2 * i + 1] = a - amp
            i -= 1
        width *= 2
        level += 1
    return out_arr


def scatter_shift(const double[::1] c, const cnp.int64_t[::1] src,
                  const cnp.int64_t[::1] dst, const double[::1] amp):
    cdef Py_ssize_t e, m = src.shape[0]
    out_arr = np.zeros(c.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    for e in range(m):
        out[dst[e]] += amp[e] * c[src[e]]
    return out_arr


def block_oscillation(const double[:, ::1] s, Py_ssize_t keep):
    cdef Py_ssize_t rows = s.shape[0], m = s.shape[1]
    cdef Py_ssize_t r, j
    cdef double best, spread
    out_arr = np.empty(rows, dtype=np.float64)
    cdef double[::1] out = out_arr
    for r in range(rows):
        best = s[r, keep - 1] - s[r, 0]
        for j in range(1, m - keep + 1):
            spread = s[r, j + keep - 1] - s[r, j]
            if spread < best:
                best = spread
        out[r] = best / 2.0
    return out_arr


def maximal_chain(level_values):
    cdef Py_ssize_t depth = len(level_values) - 1
    cdef Py_ssize_t n = 1 << depth
    cdef Py_ssize_t level, i, m
    cdef double a, v
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] vals
    vals = np.ascontiguousarray(level_values[0], dtype=np.float64)
    out[0] = vals[0]
    # double the running maximum in place, walking down so unread slots are never overwritten
    for level in range(1, depth + 1):
        vals = np.ascontiguousarray(level_values[level], dtype=np.float64)
        m = 1 << (level - 1)
        for i in range(m - 1, -1, -1):
            a = out[i]
            v = vals[2 * i + 1]
            out[2 * i + 1] = v if v > a else a
            v = vals[2 * i]
            out[2 * i] = v if v > a else a
    return out_arr
