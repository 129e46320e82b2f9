"""Nonincreasing rearrangements, medians and local mean oscillation on dyadic intervals.

Conventions
-----------
``(f chi_Q)^*(s) = inf{t >= 0 : |{x in Q : |f(x)| > t}| <= s}`` (right-continuous).
With ``M`` covered cells of width ``h`` the condition ``#{|f| > t} * h <= s``
allows ``k = floor(s / h)`` cells above ``t``, so the rearrangement is the
``(k+1)``-th largest ``|value|`` (0 when ``k >= M``).  Every quantity here is
read off sorted cell values, so results are exact up to the arithmetic of
the inputs themselves.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .dyadic import ROOT, DyadicInterval, StepFunction
from .errors import BadQuantile, IntervalTooFine, ValidationError


def _block(f: StepFunction, interval: DyadicInterval) -> np.ndarray:
    if interval.level > f.depth:
        raise IntervalTooFine(f"{interval} is finer than depth {f.depth}")
    if interval.level < 0:
        raise ValidationError("rearrangements are taken over intervals inside the root")
    return f.cells[interval.cell_slice(f.depth)]


def _check_lambda(lam: float):
    if not 0.0 < lam < 1.0:
        raise BadQuantile(f"lambda must lie in (0, 1), got {lam}")


def _cells_allowed(s: float, depth: int) -> int:
    """Largest number of depth-``depth`` cells whose total measure is <= s."""
    return int(math.floor(s * (1 << depth)))


def decreasing_values(values) -> np.ndarray:
    return np.sort(np.abs(np.asarray(values, dtype=float)))[::-1]


def rearrangement_at(f: StepFunction, interval: DyadicInterval, s: float) -> float:
    """``(f chi_Q)^*(s)`` for ``0 < s <= |Q|``."""
    block = _block(f, interval)
    if not 0.0 < s <= interval.length:
        raise BadQuantile(f"s={s} outside (0, |Q|] = (0, {interval.length}]")
    k = _cells_allowed(s, f.depth)
    a = decreasing_values(block)
    return float(a[k]) if k < a.size else 0.0


def rearrangement_left_limit(f: StepFunction, interval: DyadicInterval, s: float) -> float:
    """``lim_{u -> s-} (f chi_Q)^*(u)``, i.e. ``inf{t : |{|f| > t}| < s}``."""
    block = _block(f, interval)
    if not 0.0 < s <= interval.length:
        raise BadQuantile(f"s={s} outside (0, |Q|]")
    k = int(math.ceil(s * (1 << f.depth))) - 1
    a = decreasing_values(block)
    return float(a[k]) if k < a.size else 0.0


class MedianInterval(NamedTuple):
    low: float
    high: float

    def contains(self, m: float) -> bool:
        return self.low <= m <= self.high

    def closest_to(self, target: float) -> float:
        return float(min(max(target, self.low), self.high))


def median_interval(f: StepFunction, interval: DyadicInterval) -> MedianInterval:
    """All ``m`` with ``|{f > m}| <= |Q|/2`` and ``|{f < m}| <= |Q|/2``."""
    b = np.sort(_block(f, interval))
    m = b.size
    # 1-based positions ceil(m/2) and floor(m/2)+1
    return MedianInterval(float(b[(m + 1) // 2 - 1]), float(b[m // 2]))


def median(f: StepFunction, interval: DyadicInterval) -> float:
    """Lower median: the least admissible median value."""
    return median_interval(f, interval).low


def weak_lp_norm(f: StepFunction, interval: DyadicInterval, p: float) -> float:
    """``sup_t t (|{x in Q : |f| > t}| / |Q|)^(1/p)``, exact."""
    a = decreasing_values(_block(f, interval))
    counts = np.arange(1, a.size + 1)
    # sup over t approaches each value from below, where the count includes ties
    return float(np.max(a * (counts / a.size) ** (1.0 / p)))


def local_mean_oscillation(f: StepFunction, interval: DyadicInterval, lam: float) -> float:
    """``omega_lambda(f, Q) = inf_c ((f - c) chi_Q)^*(lambda |Q|)``.

    With ``k`` cells allowed above the threshold the optimum is the smallest
    half-range over ``M - k`` consecutive sorted values, attained at the
    window midpoint.
    """
    _check_lambda(lam)
    block = np.sort(_block(f, interval))
    keep = block.size - _cells_allowed(lam * interval.length, f.depth)
    return float(kernels.block_oscillation(block[None, :], keep)[0])


def best_center(f: StepFunction, interval: DyadicInterval, lam: float) -> float:
    """A recentering constant attaining ``omega_lambda(f, Q)``."""
    _check_lambda(lam)
    b = np.sort(_block(f, interval))
    keep = b.size - _cells_allowed(lam * interval.length, f.depth)
    spread = b[keep - 1:] - b[: b.size - keep + 1]
    j = int(np.argmin(spread))
    return float((b[j] + b[j + keep - 1]) / 2.0)


def oscillation_by_level(f: StepFunction, lam: float, root: DyadicInterval = ROOT):
    """``out[l][i]`` = omega_lambda over the ``i``-th level-``l`` subinterval of ``root``.

    Levels are relative to ``root`` (``out[0]`` is the root itself).
    """
    _check_lambda(lam)
    block = _block(f, root)
    rel_depth = f.depth - root.level
    out = []
    for level in range(rel_depth + 1):
        rows = np.sort(block.reshape(1 << level, -1), axis=1)
        m = rows.shape[1]
        keep = m - int(math.floor(lam * m))
        out.append(kernels.block_oscillation(rows, keep))
    return out


def local_sharp_maximal_dyadic(f: StepFunction, root: DyadicInterval, lam: float) -> StepFunction:
    """``M^{#,d}_{lambda, Q0} f`` on the full grid; zero outside ``Q0``.

    Below depth ``D`` every dyadic subinterval is a union of cells with the
    same chain, so the supremum is a maximum over the chain of each cell.
    """
    levels = oscillation_by_level(f, lam, root)
    out = np.zeros(f.n_cells)
    out[root.cell_slice(f.depth)] = kernels.maximal_chain(levels)
    return StepFunction(f.depth, out)
