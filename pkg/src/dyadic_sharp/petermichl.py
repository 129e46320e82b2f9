"""Averaging the dyadic Hilbert transform over translated and dilated grids.

A grid is the image of the standard dyadic grid on the super-root
``[0, 2^J)`` under ``u -> x = o + t u``.  Grid 0 is the identity; the others
use stratified offsets ``o = -theta t 2^(J-1)`` with ``theta`` in ``[0, 1)`` and
log-uniform dilations ``t`` in ``[1, 2)``, so ``[0, 1)`` always sits inside
the left half of the super-root.  Functions move between the ``x`` cells and
the ``u`` cells through exact cumulative integrals, which is conservative
for step functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import StepFunction
from .errors import ValidationError
from .haar import apply_shift_cells, dyadic_hilbert_spec

DEFAULT_PADDING = 4


def grid_parameters(shifts: int, dilations: int, seed: int):
    """``(theta, t)`` arrays; index 0 of each is the identity grid."""
    if shifts < 1 or dilations < 1:
        raise ValidationError("shifts and dilations must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(shifts)
    v = rng.random(dilations)
    theta = (np.arange(shifts) + u) / shifts
    t = 2.0 ** ((np.arange(dilations) + v) / dilations)
    theta[0], t[0] = 0.0, 1.0
    return theta, t


def _cumulative(cells, width):
    c = np.zeros(cells.shape[:-1] + (cells.shape[-1] + 1,))
    c[..., 1:] = np.cumsum(cells, axis=-1) * width
    return c


def petermichl_average(f: StepFunction, shifts: int = 1, dilations: int = 1, seed: int = 0,
                       padding: int = DEFAULT_PADDING) -> StepFunction:
    """Mean of ``H^d`` over ``shifts x dilations`` grids, returned on the cells of ``f``."""
    if padding < 2:
        raise ValidationError("padding must be >= 2 so [0, 1) fits every shifted grid")
    depth = f.depth
    n_x = f.n_cells
    h = f.cell_width
    n_u = n_x << padding
    spec = dyadic_hilbert_spec(depth + padding)
    theta, dil = grid_parameters(shifts, dilations, seed)
    x_edges = np.arange(n_x + 1) * h
    f_cum = _cumulative(f.cells, h)  # F(x) on x_edges; f = 0 outside [0, 1)
    u_edges = np.arange(n_u + 1) * h
    total = np.zeros(n_x)
    for t in dil:
        off = -theta * t * 2.0 ** (padding - 1)
        xs = off[:, None] + t * u_edges[None, :]
        fu = np.diff(np.interp(xs, x_edges, f_cum, left=0.0, right=f_cum[-1]), axis=1) / (t * h)
        gu = apply_shift_cells(spec, fu, check=False)
        g_cum = _cumulative(gu, h)
        ux = (x_edges[None, :] - off[:, None]) / t
        back = np.empty((off.size, n_x + 1))
        for r in range(off.size):
            back[r] = np.interp(ux[r], u_edges, g_cum[r])
        total += (t * np.diff(back, axis=1) / h).sum(axis=0)
    return StepFunction(depth, total / (theta.size * dil.size))


def indicator_cells(a: float, b: float, depth: int) -> StepFunction:
    n = 1 << depth
    edges = np.arange(n + 1) / n
    return StepFunction(depth, np.diff(np.clip(edges, a, b)) * n)


def _log_antiderivative(x, c):
    d = x - c
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d == 0, 0.0, d * np.log(np.abs(d))) - x


def hilbert_indicator(x, a: float, b: float):
    """``H chi_[a,b](x) = (1/pi) ln|(x - a)/(x - b)|`` (principal value convention)."""
    x = np.asarray(x, dtype=float)
    return np.log(np.abs((x - a) / (x - b))) / np.pi


def hilbert_indicator_cells(a: float, b: float, depth: int) -> StepFunction:
    """Exact cell averages of :func:`hilbert_indicator`."""
    n = 1 << depth
    e = np.arange(n + 1) / n
    prim = (_log_antiderivative(e, a) - _log_antiderivative(e, b)) / np.pi
    return StepFunction(depth, np.diff(prim) * n)


@dataclass(frozen=True)
class HilbertComparison:
    a: float
    b: float
    shifts: int
    dilations: int
    depth: int
    seed: int
    scale: float
    rel_error: float
    n_cells_used: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def hilbert_compare(a: float, b: float, shifts: int, dilations: int, depth: int, seed: int = 0,
                    padding: int = DEFAULT_PADDING) -> HilbertComparison:
    """Fit ``kappa * average(H^d) chi_[a,b]`` to the closed form away from ``a`` and ``b``."""
    if not 0.0 <= a < b <= 1.0:
        raise ValidationError(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    f = indicator_cells(a, b, depth)
    out = petermichl_average(f, shifts, dilations, seed, padding).cells
    target = hilbert_indicator_cells(a, b, depth).cells
    n = 1 << depth
    lo = np.arange(n) / n
    hi = lo + 1.0 / n
    gap = 4.0 / n

    def dist(c):
        return np.maximum(0.0, np.maximum(lo - c, c - hi))

    mask = (dist(a) >= gap) & (dist(b) >= gap)
    o, g = out[mask], target[mask]
    kappa = float(o @ g / (o @ o))
    err = float(np.linalg.norm(kappa * o - g) / np.linalg.norm(g))
    return HilbertComparison(a, b, shifts, dilations, depth, seed, kappa, err, int(mask.sum()))
