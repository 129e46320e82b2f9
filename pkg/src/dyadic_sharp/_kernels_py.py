"""Pure numpy implementations of the hot kernels.

These are the reference versions: the compiled module ``_ckernels`` must
agree with them to rounding (see tests/test_kernels.py).  All functions
operate on the last axis and accept batches.

Haar coefficient arrays use the heap layout: slot 0 holds the mean over
the root, slot ``2**level + index`` holds ``<f, h_I>`` for ``I = (level, index)``.
"""

import numpy as np
from scipy import sparse


def haar_forward(cells):
    x = np.asarray(cells, dtype=float)
    n = x.shape[-1]
    depth = n.bit_length() - 1
    out = np.empty_like(x)
    s = x / n  # cell integrals
    for level in range(depth - 1, -1, -1):
        left, right = s[..., 0::2], s[..., 1::2]
        out[..., 1 << level: 2 << level] = (left - right) * 2.0 ** (level / 2)
        s = left + right
    out[..., 0] = s[..., 0]
    return out


def haar_inverse(coeffs):
    c = np.asarray(coeffs, dtype=float)
    n = c.shape[-1]
    depth = n.bit_length() - 1
    a = c[..., 0:1]
    for level in range(depth):
        amp = c[..., 1 << level: 2 << level] * 2.0 ** (level / 2)
        nxt = np.empty(c.shape[:-1] + (2 << level,))
        nxt[..., 0::2] = a + amp
        nxt[..., 1::2] = a - amp
        a = nxt
    return a


def scatter_shift(coeffs, src, dst, amp):
    """``out[dst[e]] += amp[e] * coeffs[src[e]]``.

    Single vectors accumulate in entry order; batches go through a sparse
    matrix product (same sums, possibly different rounding order).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim == 1:
        out = np.zeros_like(c)
        np.add.at(out, dst, amp * c[src])
        return out
    n = c.shape[-1]
    mat = sparse.csr_matrix((amp, (dst, src)), shape=(n, n))
    flat = c.reshape(-1, n)
    return np.asarray((mat @ flat.T).T).reshape(c.shape)


def block_oscillation(sorted_blocks, keep):
    """Smallest half-range over windows of ``keep`` consecutive sorted values, per row."""
    s = np.asarray(sorted_blocks, dtype=float)
    m = s.shape[-1]
    spread = s[..., keep - 1:] - s[..., : m - keep + 1]
    return spread.min(axis=-1) / 2.0


def maximal_chain(level_values):
    """Per-cell maximum of ``level_values[l]`` along the dyadic chain of each cell."""
    run = np.asarray(level_values[0], dtype=float)
    for vals in level_values[1:]:
        run = np.maximum(np.repeat(run, 2, axis=-1), vals)
    return run
