"""Dyadic Muckenhoupt constants, dyadic maximal operators and weighted operator norms.

The L^2(w) inner product on depth-D cells is ``sum_i f_i g_i w_i 2^-D``, so
the operator norm of a cell matrix ``H`` on L^2(w) is the spectral norm of
``W^{1/2} H W^{-1/2}`` (``W`` = diagonal of cell weights).
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .dyadic import DyadicInterval, StepFunction, average, level_means, level_sums, refine
from .errors import BadExponent, DepthMismatch, DepthTooLarge, NoConvergence, ValidationError
from .haar import MAX_DENSE_CELLS, HaarShiftSpec, adjoint_spec, apply_shift_cells, assemble_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ApReport:
    p: float
    constant: float
    witness: DyadicInterval
    depth: int

    def to_json(self) -> dict:
        return {"p": self.p, "constant": self.constant,
                "witness": self.witness.to_list(), "depth": self.depth}


@dataclass(frozen=True)
class NormReport:
    value: float
    method: str
    iterations: int
    residual: float
    depth: int

    def to_json(self) -> dict:
        return asdict(self)


def _dual_power(p: float) -> float:
    """Exponent ``1 - p'`` applied to w in the A_p functional."""
    if not p > 1:
        raise BadExponent(f"A_p needs p > 1, got {p}")
    return 1.0 - p / (p - 1.0)


def ap_value(w: StepFunction, interval: DyadicInterval, p: float) -> float:
    """``(avg_I w) (avg_I w^{1-p'})^{p-1}`` on one interval."""
    w.check_weight()
    sigma = StepFunction(w.depth, w.cells ** _dual_power(p))
    return average(w, interval) * average(sigma, interval) ** (p - 1.0)


def ap_constant(w: StepFunction, p: float = 2.0) -> ApReport:
    """Dyadic ``[w]_{A_p}``: supremum over every dyadic interval of level <= depth."""
    w.check_weight()
    expo = _dual_power(p)
    mw = level_means(w.cells)
    ms = level_means(w.cells ** expo)
    best, witness = -np.inf, None
    for level, (a, b) in enumerate(zip(mw, ms)):
        vals = a * b ** (p - 1.0)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, witness = float(vals[i]), DyadicInterval(level, i)
    return ApReport(float(p), best, witness, w.depth)


def dyadic_maximal(f: StepFunction) -> StepFunction:
    """``M^d f(x)``: largest average of ``|f|`` over dyadic intervals containing x.

    Intervals above the root only average in zeros, so padding the domain
    never changes the values on the root.
    """
    return StepFunction(f.depth, kernels.maximal_chain(level_means(np.abs(f.cells))))


def weighted_dyadic_maximal(f: StepFunction, sigma: StepFunction) -> StepFunction:
    """``M^d_sigma f(x) = sup_{x in Q} sigma(Q)^{-1} int_Q |f| sigma``."""
    sigma.check_weight()
    if sigma.depth != f.depth:
        raise DepthMismatch("f and sigma must share a grid")
    num = level_sums(np.abs(f.cells) * sigma.cells)
    den = level_sums(sigma.cells)
    return StepFunction(f.depth, kernels.maximal_chain([n / d for n, d in zip(num, den)]))


def weighted_lp_norm(cells, w_cells, p: float = 2.0) -> np.ndarray:
    """``||f||_{L^p(w)}`` along the last axis (cell width folded in)."""
    cells = np.asarray(cells, dtype=float)
    n = cells.shape[-1]
    return (np.sum(np.abs(cells) ** p * w_cells, axis=-1) / n) ** (1.0 / p)


def power_weight(alpha: float, depth: int) -> StepFunction:
    """Exact cell averages of ``x**alpha`` on [0, 1)."""
    if not -1.0 < alpha < 1.0:
        raise BadExponent(f"power weight needs -1 < alpha < 1, got {alpha}")
    if alpha == 0:
        return StepFunction.constant(1.0, depth)
    n = 1 << depth
    edges = np.arange(n + 1) / n
    prim = edges ** (alpha + 1.0)
    return StepFunction(depth, (prim[1:] - prim[:-1]) * n / (alpha + 1.0))


def _weighted_operator(spec: HaarShiftSpec, w: StepFunction):
    root_w = np.sqrt(w.cells)
    adj = adjoint_spec(spec)

    def forward(x):
        return root_w * apply_shift_cells(spec, x / root_w, check=False)

    def backward(y):
        return apply_shift_cells(adj, y * root_w, check=False) / root_w

    return forward, backward


def weighted_operator_norm(spec: HaarShiftSpec, w: StepFunction, depth: int | None = None,
                           method: str = "dense", seed: int = 0, tol: float = 1e-8,
                           max_iter: int = 10_000) -> NormReport:
    """Exact finite-depth ``||H||_{L^2(w) -> L^2(w)}``.

    ``dense`` takes the largest singular value of the similarity-transformed
    matrix; ``power`` runs power iteration on its normal operator without
    forming a matrix.
    """
    w.check_weight()
    depth = w.depth if depth is None else depth
    if w.depth > depth:
        raise DepthMismatch(f"weight depth {w.depth} exceeds requested depth {depth}")
    if w.depth < depth:
        w = refine(w, depth)
    spec.check_admissible()
    if method == "dense":
        if (1 << depth) > MAX_DENSE_CELLS:
            raise DepthTooLarge(f"dense norms limited to {MAX_DENSE_CELLS} cells")
        root_w = np.sqrt(w.cells)
        mat = assemble_matrix(spec, depth) * root_w[:, None] / root_w[None, :]
        value = float(np.linalg.svd(mat, compute_uv=False)[0])
        return NormReport(value, "dense-singular-value", 0, 0.0, depth)
    if method == "power":
        return _power_norm(spec, w, seed, tol, max_iter)
    raise ValidationError(f"unknown norm method {method!r}")


def _power_norm(spec, w, seed, tol, max_iter) -> NormReport:
    forward, backward = _weighted_operator(spec, w)
    x = np.random.default_rng(seed).standard_normal(w.n_cells)
    x /= np.linalg.norm(x)
    sigma_old = 0.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        y = forward(x)
        z = backward(y)
        lam = float(y @ y)  # Rayleigh quotient of the normal operator, |x| = 1
        sigma = np.sqrt(lam)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return NormReport(0.0, "power-iteration", it, 0.0, w.depth)
        residual = float(np.linalg.norm(z - lam * x) / lam)
        if abs(sigma - sigma_old) <= tol * sigma and it > 1:
            logger.debug("power iteration converged in %d steps", it)
            return NormReport(float(sigma), "power-iteration", it, residual, w.depth)
        sigma_old = sigma
        x = z / nz
    if residual > tol:
        raise NoConvergence(f"power iteration hit {max_iter} steps, residual {residual:.2e}")
    return NormReport(float(sigma_old), "power-iteration", max_iter, residual, w.depth)


def maximal_ratios(cells, w: StepFunction) -> np.ndarray:
    """``||M^d f||_{L^2(w)} / ||f||_{L^2(w)}`` for each row of ``cells``."""
    cells = np.abs(np.atleast_2d(cells))
    mf = kernels.maximal_chain(level_means(cells))
    return weighted_lp_norm(mf, w.cells) / weighted_lp_norm(cells, w.cells)


def maximal_weighted_norm_lb(w: StepFunction, trials: int = 64, seed: int = 0,
                             ascent_rounds: int = 3) -> float:
    """Lower estimate of ``||M^d||_{L^2(w)}`` from explicit test functions.

    Candidates: indicators times ``w^{-1}`` on coarse dyadic intervals (the
    usual extremals), random nonnegative functions, then greedy ascent that
    adds ``w^{-1}``-shaped bumps on dyadic intervals while the ratio improves.
    """
    w.check_weight()
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    n = w.n_cells
    inv = 1.0 / w.cells
    max_level = min(w.depth, 8)
    bumps = []
    for level in range(max_level + 1):
        width = n >> level
        for i in range(1 << level):
            b = np.zeros(n)
            b[i * width:(i + 1) * width] = inv[i * width:(i + 1) * width]
            bumps.append(b)
    bumps = np.array(bumps)
    pool = [np.ones((1, n)), bumps]
    for _ in range(trials):
        level = int(rng.integers(0, w.depth + 1))
        width = n >> level
        i = int(rng.integers(0, 1 << level))
        f = rng.lognormal(size=n)
        if rng.random() < 0.5:
            f = f * inv
        mask = np.zeros(n)
        mask[i * width:(i + 1) * width] = 1.0
        pool.append((f * (mask + 1e-3 * rng.random())).reshape(1, n))
    pool = np.vstack(pool)
    ratios = maximal_ratios(pool, w)
    best_i = int(np.argmax(ratios))
    best, best_f = float(ratios[best_i]), pool[best_i]
    scale = np.linalg.norm(best_f)
    for _ in range(ascent_rounds):
        improved = False
        for step in (1.0, 0.25):
            trial = best_f[None, :] + step * scale * bumps / np.linalg.norm(bumps, axis=1)[:, None]
            r = maximal_ratios(trial, w)
            j = int(np.argmax(r))
            if r[j] > best:
                best, best_f, improved = float(r[j]), trial[j], True
        if not improved:
            break
    return best
