"""Power-weight sweeps of the weighted norm of the dyadic Hilbert transform.

Rows can run on worker threads; results are always returned in input order
and every random choice comes from a per-row seed derived from the sweep
seed, so the output does not depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BadExponent, DyadicError, ValidationError
from .haar import apply_shift_cells, dyadic_hilbert_spec
from .weighted import (ap_constant, maximal_weighted_norm_lb, power_weight,
                       weighted_operator_norm)

logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.0, 0.5, 0.75, 0.875, 0.9375, 0.96875)
DEFAULT_DEPTH = 12
CROSS_CHECK_DEPTH = 8
CSV_COLUMNS = ("alpha", "depth", "a2_constant", "op_norm", "ratio", "maximal_lb",
               "lp_p", "lp_lower_ratio", "runtime_ms")
MAX_SWEEP_DEPTH = 14


def worker_count() -> int:
    raw = os.environ.get("DYADIC_SHARP_THREADS")
    if raw is None or raw.strip() == "":
        return min(4, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"DYADIC_SHARP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("DYADIC_SHARP_THREADS must be >= 1")
    return n


def row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    depth: int
    a2_constant: float | None = None
    op_norm: float | None = None
    ratio: float | None = None
    maximal_lb: float | None = None
    lp_p: float | None = None
    lp_lower_ratio: float | None = None
    runtime_ms: int = 0
    error: str | None = None

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["lp_probe"] = (None if self.lp_p is None
                         else {"p": self.lp_p, "lower_ratio": self.lp_lower_ratio})
        return d

    def csv_fields(self, timings: bool) -> list:
        def fmt(v):
            return "" if v is None else repr(v)
        vals = [repr(self.alpha), str(self.depth)]
        if self.error is not None:
            vals += ["", f"error:{self.error}", "", "", fmt(self.lp_p), ""]
        else:
            vals += [fmt(self.a2_constant), fmt(self.op_norm), fmt(self.ratio),
                     fmt(self.maximal_lb), fmt(self.lp_p), fmt(self.lp_lower_ratio)]
        vals.append(str(self.runtime_ms) if timings else "")
        return vals


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    seed: int
    slope: float | None
    max_ratio: float | None
    max_maximal_ratio: float | None
    cross_checks: tuple = field(default=())
    a2_depth_deltas: tuple = field(default=())

    def to_csv(self, timings: bool = False) -> str:
        """CSV text; ``runtime_ms`` stays empty unless ``timings`` so output is byte-stable."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields(timings))
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"seed": self.seed, "slope": self.slope, "max_ratio": self.max_ratio,
                "max_maximal_ratio": self.max_maximal_ratio,
                "cross_checks": [dict(c) for c in self.cross_checks],
                "a2_depth_deltas": [dict(c) for c in self.a2_depth_deltas],
                "rows": [r.to_json() for r in self.rows]}


def lp_lower_probe(alpha: float, p: float, depth: int) -> float:
    """``||H^d f||_{L^p(w)} / ||f||_{L^p(w)}`` for ``f = w^{1-p'} chi_[0, delta)``.

    ``delta = 2^{2-D}``.  Any ratio of this kind is a lower bound for the
    operator norm on ``L^p(w)``.
    """
    if not p > 1:
        raise BadExponent(f"p must exceed 1, got {p}")
    if depth < 2:
        raise ValidationError("lp probe needs depth >= 2")
    w = power_weight(alpha, depth)
    n = w.n_cells
    f = np.zeros(n)
    width = n >> (depth - 2)
    f[:width] = w.cells[:width] ** (1.0 - p / (p - 1.0))
    g = apply_shift_cells(dyadic_hilbert_spec(depth), f, check=False)
    num = np.sum(np.abs(g) ** p * w.cells)
    den = np.sum(np.abs(f) ** p * w.cells)
    return float((num / den) ** (1.0 / p))


def _one_row(alpha, depth, seed, method, lp_p, trials):
    start = time.perf_counter()
    try:
        w = power_weight(alpha, depth)
        a2 = ap_constant(w, 2.0).constant
        norm = weighted_operator_norm(dyadic_hilbert_spec(depth), w, depth, method=method,
                                      seed=seed).value
        lb = maximal_weighted_norm_lb(w, trials=trials, seed=seed)
        lp = None if lp_p is None else lp_lower_probe(alpha, lp_p, depth)
        ms = int(round((time.perf_counter() - start) * 1000))
        return SweepRow(float(alpha), depth, a2, norm, norm / a2, lb, lp_p, lp, ms)
    except DyadicError as exc:
        logger.warning("sweep row alpha=%r failed: %s", alpha, exc)
        ms = int(round((time.perf_counter() - start) * 1000))
        return SweepRow(float(alpha), depth, lp_p=lp_p, runtime_ms=ms, error=type(exc).__name__)


def loglog_slope(rows, min_a2: float = 2.0) -> float | None:
    pts = [(r.a2_constant, r.op_norm) for r in rows
           if r.error is None and r.a2_constant >= min_a2]
    if len(pts) < 2:
        return None
    x, y = np.log(np.array(pts)).T
    return float(np.polyfit(x, y, 1)[0])


def run_sweep(alphas=DEFAULT_ALPHAS, depth: int = DEFAULT_DEPTH, seed: int = 0,
              method: str = "power", lp_p: float | None = 2.0, trials: int = 64,
              cross_check_depth: int | None = CROSS_CHECK_DEPTH,
              workers: int | None = None) -> SweepResult:
    """One row per alpha, plus slope, dense cross-checks and depth deltas."""
    alphas = [float(a) for a in alphas]
    for a in alphas:
        if not -1.0 < a < 1.0:
            raise BadExponent(f"alpha must lie in (-1, 1), got {a}")
    if not 1 <= depth <= MAX_SWEEP_DEPTH:
        raise ValidationError(f"sweep depth must lie in [1, {MAX_SWEEP_DEPTH}]")
    if method == "dense" and depth > 12:
        raise ValidationError("dense sweeps are limited to depth 12")
    workers = worker_count() if workers is None else workers
    seeds = [row_seed(seed, i) for i in range(len(alphas))]
    args = [(a, depth, s, method, lp_p, trials) for a, s in zip(alphas, seeds)]
    if workers > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: _one_row(*x), args))
    else:
        rows = [_one_row(*x) for x in args]
    checks = []
    if cross_check_depth is not None and cross_check_depth <= depth:
        spec = dyadic_hilbert_spec(cross_check_depth)
        for a, s in zip(alphas, seeds):
            w = power_weight(a, cross_check_depth)
            dense = weighted_operator_norm(spec, w, method="dense").value
            power = weighted_operator_norm(spec, w, method="power", seed=s).value
            checks.append({"alpha": a, "depth": cross_check_depth, "dense": dense,
                           "power": power, "rel_diff": abs(dense - power) / dense})
    deltas = []
    if depth >= 2:
        for a, r in zip(alphas, rows):
            if r.error is None:
                coarse = ap_constant(power_weight(a, depth - 1), 2.0).constant
                deltas.append({"alpha": a, "a2": r.a2_constant, "a2_previous_depth": coarse,
                               "delta": r.a2_constant - coarse})
    ok = [r for r in rows if r.error is None]
    return SweepResult(
        tuple(rows), seed, loglog_slope(rows),
        max((r.ratio for r in ok), default=None),
        max((r.maximal_lb / r.a2_constant for r in ok), default=None),
        tuple(checks), tuple(deltas))
