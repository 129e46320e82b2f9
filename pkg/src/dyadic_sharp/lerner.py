"""Local mean oscillation decomposition and the domination bound for Haar shifts.

Stopping rule
-------------
In a stopping cube ``P`` with median ``m_P`` let
``A_P = ((f - m_P) chi_P)^*(theta |P|)`` and ``E_P = {x in P : |f - m_P| > A_P}``,
so ``|E_P| <= theta |P|``.  The next cubes inside ``P`` are the maximal dyadic
``Q`` in ``P`` with ``|Q cap E_P| > |Q| / 2``.  Cells of ``E_P`` are dyadic, so
these cubes cover ``E_P`` and their union has measure below ``2 |E_P|``.

Why ``theta = 1/4`` gives constants (4, 4): a point outside every child of
its last cube ``P`` has ``|f - m_P| <= A_P <= 2 omega_{1/4}(P)``.  For a child
``Q`` the parent ``Qh`` has at least half its measure in ``{|f - m_P| <= A_P}``
(maximality), and the best center ``c`` of ``omega_{1/8}(Qh)`` misses at most
a quarter of ``Q``, so ``|m_Q - m_P| <= 2 omega_{1/8}(Qh) + A_P``.  Since
``omega_{1/4}(Q) <= omega_{1/8}(Qh)``, telescoping along the chain gives
``4 M^#_{1/4} f + 4 sum omega_{1/8}(Qh)``.  The ``1/8`` threshold has no such
argument for the first term, hence the ``1/4`` default.

Everything is computed on the cell level of the depth-``D`` grid, so every
property is checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dyadic import DyadicInterval, StepFunction, average, level_means
from .errors import BadQuantile, DegenerateDomination, IntervalTooFine, ValidationError
from .haar import HaarShiftSpec, apply_shift_cells
from .rearrangement import median_interval, oscillation_by_level
from .weighted import dyadic_maximal

DEFAULT_THRESHOLD = 0.25
LAMBDA_SHARP = 0.25
LAMBDA_OSC = 0.125
SLACK = 1e-12


@dataclass(frozen=True)
class LernerDecomposition:
    """Stopping cubes ``Q_j^k`` for ``k >= 1``; ``generations[k-1]`` holds generation k."""

    root: DyadicInterval
    generations: tuple
    depth: int
    medians: tuple = field(default=(), compare=False)

    def cubes(self):
        for k, gen in enumerate(self.generations, start=1):
            for q in gen:
                yield k, q

    def n_cubes(self) -> int:
        return sum(len(g) for g in self.generations)

    def omega_mask(self, k: int) -> np.ndarray:
        """Cell mask of ``Omega_k`` on the root (``Omega_0`` is the root)."""
        m = 1 << (self.depth - self.root.level)
        if k == 0:
            return np.ones(m, dtype=bool)
        mask = np.zeros(m, dtype=bool)
        if k <= len(self.generations):
            for q in self.generations[k - 1]:
                mask[self._local(q)] = True
        return mask

    def _local(self, q: DyadicInterval) -> slice:
        rel = self.depth - q.level
        start = (q.index << rel) - (self.root.index << (self.depth - self.root.level))
        return slice(start, start + (1 << rel))

    def to_json(self) -> dict:
        return {"root": self.root.to_list(),
                "generations": [[q.to_list() for q in gen] for gen in self.generations]}

    @classmethod
    def from_json(cls, data: dict, depth: int) -> "LernerDecomposition":
        try:
            root = DyadicInterval(*data["root"])
            gens = tuple(tuple(DyadicInterval(*q) for q in gen) for gen in data["generations"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed decomposition JSON: {exc}") from None
        return cls(root, gens, depth)

    def without(self, k: int, j: int) -> "LernerDecomposition":
        """Copy with cube ``j`` of generation ``k`` removed (audit and tamper tests)."""
        gens = list(self.generations)
        gens[k - 1] = gens[k - 1][:j] + gens[k - 1][j + 1:]
        return LernerDecomposition(self.root, tuple(gens), self.depth)


def _root_block(f: StepFunction, root: DyadicInterval) -> np.ndarray:
    if root.level > f.depth:
        raise IntervalTooFine(f"{root} is finer than depth {f.depth}")
    if root.level < 0:
        raise ValidationError("the decomposition root must lie inside the grid root")
    return f.cells[root.cell_slice(f.depth)]


def _lower_median(block: np.ndarray) -> float:
    b = np.sort(block)
    return float(b[(b.size + 1) // 2 - 1])


def _density_cubes(exceptional: np.ndarray, parent: DyadicInterval) -> list:
    """Maximal dyadic ``Q`` strictly inside ``parent`` with ``|Q cap E| > |Q|/2``."""
    m = exceptional.size
    covered = np.zeros(m, dtype=bool)
    out = []
    for lev in range(1, m.bit_length()):
        width = m >> lev
        counts = exceptional.reshape(-1, width).sum(axis=1)
        sel = (2 * counts > width) & ~covered[::width]
        for i in np.flatnonzero(sel):
            out.append(DyadicInterval(parent.level + lev, (parent.index << lev) + int(i)))
        covered |= np.repeat(sel, width)
    return out


def decompose(f: StepFunction, root: DyadicInterval, threshold: float = DEFAULT_THRESHOLD) -> LernerDecomposition:
    """Stopping-time decomposition of ``f`` on ``root`` (lower medians throughout)."""
    if not 0.0 < threshold < 0.5:
        raise BadQuantile(f"threshold must lie in (0, 1/2), got {threshold}")
    _root_block(f, root)
    current = [root]
    generations, medians = [], []
    while current:
        nxt, meds = [], []
        for p in current:
            block = f.cells[p.cell_slice(f.depth)]
            m = _lower_median(block)
            dev = np.abs(block - m)
            k = int(math.floor(threshold * block.size))
            a = np.sort(dev)[::-1]
            cut = a[k] if k < a.size else 0.0
            nxt.extend(_density_cubes(dev > cut, p))
        if not nxt:
            break
        nxt.sort()
        for q in nxt:
            meds.append(_lower_median(f.cells[q.cell_slice(f.depth)]))
        generations.append(tuple(nxt))
        medians.append(tuple(meds))
        current = nxt
    return LernerDecomposition(root, tuple(generations), f.depth, tuple(medians))


def oscillation_rhs(f: StepFunction, dec: LernerDecomposition, lam_sharp: float = LAMBDA_SHARP,
                    lam_osc: float = LAMBDA_OSC, c_sharp: float = 4.0, c_osc: float = 4.0) -> StepFunction:
    """``c_sharp M^{#,d}_{lam_sharp} f + c_osc sum_k,j omega_{lam_osc}(f, parent Q) chi_Q``."""
    sharp, osc_sum = _rhs_parts(f, dec, lam_sharp, lam_osc)
    out = np.zeros(f.n_cells)
    out[dec.root.cell_slice(f.depth)] = c_sharp * sharp + c_osc * osc_sum
    return StepFunction(f.depth, out)


def _rhs_parts(f, dec, lam_sharp, lam_osc):
    if dec.depth != f.depth:
        raise ValidationError(f"decomposition depth {dec.depth} differs from f depth {f.depth}")
    sharp = kernels.maximal_chain(oscillation_by_level(f, lam_sharp, dec.root))
    osc = oscillation_by_level(f, lam_osc, dec.root)
    osc_sum = np.zeros(sharp.size)
    for _, q in dec.cubes():
        if q == dec.root or not dec.root.contains(q) or q.level > f.depth:
            continue  # reported by the containment check
        par = q.parent()
        rel = par.level - dec.root.level
        osc_sum[dec._local(q)] += osc[rel][par.index - (dec.root.index << rel)]
    return sharp, osc_sum


@dataclass(frozen=True)
class PropertyResult:
    name: str
    ok: bool
    cell: int | None = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "cell": self.cell, "detail": self.detail}


@dataclass(frozen=True)
class VerificationReport:
    results: tuple
    least_constant: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self):
        return [r for r in self.results if not r.ok]

    def __getitem__(self, name: str) -> PropertyResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"ok": self.ok, "least_constant": self.least_constant,
                "properties": [r.to_json() for r in self.results]}


def _first(mask: np.ndarray, offset: int) -> int | None:
    idx = np.flatnonzero(mask)
    return int(idx[0]) + offset if idx.size else None


def verify_decomposition(f: StepFunction, dec: LernerDecomposition, lam_sharp: float = LAMBDA_SHARP,
                         lam_osc: float = LAMBDA_OSC, c_sharp: float = 4.0,
                         c_osc: float = 4.0) -> VerificationReport:
    """Check every structural property and the pointwise bound on each cell.

    Never raises for a well-formed decomposition; each property reports the
    first offending grid cell.
    """
    root = dec.root
    offset = root.index << (f.depth - root.level)
    m = 1 << (f.depth - root.level)
    results = []

    # cubes inside the root, and disjoint within a generation
    inside_bad, disj_cell = None, None
    counts = []
    for k, gen in enumerate(dec.generations, start=1):
        c = np.zeros(m, dtype=np.int64)
        for q in gen:
            if not (root.contains(q) and q != root and q.level <= f.depth):
                inside_bad = inside_bad or f"generation {k} cube {q.to_list()} not strictly inside root"
                continue
            c[dec._local(q)] += 1
        counts.append(c)
        if disj_cell is None and (c > 1).any():
            disj_cell = _first(c > 1, offset)
    results.append(PropertyResult("containment", inside_bad is None, None, inside_bad or ""))
    results.append(PropertyResult("disjointness", disj_cell is None, disj_cell))

    omegas = [np.ones(m, dtype=bool)] + [c > 0 for c in counts] + [np.zeros(m, dtype=bool)]
    nest_cell = None
    for k in range(1, len(omegas) - 1):
        bad = omegas[k + 1] & ~omegas[k]
        if bad.any():
            nest_cell = _first(bad, offset)
            break
    results.append(PropertyResult("nesting", nest_cell is None, nest_cell))

    meas_bad = None
    e_owner = np.full(m, -1, dtype=np.int64)
    e_disj_cell, e_meas_bad = None, None
    cube_id = 0
    for k, gen in enumerate([(root,)] + list(dec.generations)):
        nxt = omegas[k + 1]
        for q in gen:
            if not root.contains(q) or q.level > f.depth:
                continue
            sl = dec._local(q)
            size = sl.stop - sl.start
            inner = int(nxt[sl].sum())
            if meas_bad is None and 2 * inner > size:
                meas_bad = (q, inner, size)
            if k == 0:
                continue
            e = ~nxt[sl]
            if e_meas_bad is None and 2 * int(e.sum()) < size:
                e_meas_bad = (q, int(e.sum()), size)
            clash = e & (e_owner[sl] >= 0)
            if e_disj_cell is None and clash.any():
                e_disj_cell = _first(clash, offset + sl.start)
            e_owner[sl][e] = cube_id
            cube_id += 1
    results.append(PropertyResult(
        "half_measure", meas_bad is None,
        None if meas_bad is None else offset + dec._local(meas_bad[0]).start,
        "" if meas_bad is None else f"cube {meas_bad[0].to_list()}: {meas_bad[1]} of {meas_bad[2]} cells in next layer"))
    results.append(PropertyResult("exceptional_disjointness", e_disj_cell is None, e_disj_cell))
    results.append(PropertyResult(
        "exceptional_measure", e_meas_bad is None,
        None if e_meas_bad is None else offset + dec._local(e_meas_bad[0]).start,
        "" if e_meas_bad is None else f"cube {e_meas_bad[0].to_list()}: |E| = {e_meas_bad[1]} of {e_meas_bad[2]} cells"))

    ngen_ok = len(dec.generations) <= f.depth - root.level + 1
    results.append(PropertyResult("generation_count", ngen_ok, None,
                                  "" if ngen_ok else f"{len(dec.generations)} generations"))

    block = _root_block(f, root)
    lhs = np.abs(block - _lower_median(block))
    sharp, osc_sum = _rhs_parts(f, dec, lam_sharp, lam_osc)
    rhs = c_sharp * sharp + c_osc * osc_sum
    tol = SLACK * max(1.0, float(np.max(np.abs(block))))
    bad = lhs > rhs + tol
    results.append(PropertyResult(
        "pointwise_bound", not bad.any(), _first(bad, offset),
        "" if not bad.any() else f"|f - m| = {lhs[bad][0]!r} > {rhs[bad][0]!r}"))

    base = sharp + osc_sum
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(lhs > tol, lhs / base, 0.0)
    least = float(np.max(ratio)) if ratio.size else 0.0
    return VerificationReport(tuple(results), least)


def _far_masks(tau: int, depth: int, max_level: int) -> np.ndarray:
    """Row per dyadic ``Q`` (level order): 1 on cells outside ``Q^tau``."""
    n = 1 << depth
    cell = np.arange(n)
    rows = []
    for lev in range(max_level + 1):
        idx = np.arange(1 << lev)[:, None]
        if lev >= tau:
            rows.append((cell >> (depth - lev + tau)) != (idx >> tau))
        else:
            rows.append(np.zeros((idx.size, n), dtype=bool))
    return np.vstack(rows).astype(float)


def far_part_spreads(spec: HaarShiftSpec, f: StepFunction, max_level: int | None = None):
    """Spread of ``H(f chi_{outside Q^tau})`` over the cells of ``Q``, for every dyadic ``Q``.

    Returns ``(intervals, spreads)`` for levels ``0..max_level``.  When
    ``Q^tau`` lies above the grid root it covers all of ``f``'s support, so
    the far part is zero there.
    """
    depth = f.depth
    max_level = depth if max_level is None else min(max_level, depth)
    images = apply_shift_cells(spec, _far_masks(spec.tau, depth, max_level) * f.cells, check=False)
    qs, spreads, row = [], [], 0
    for lev in range(max_level + 1):
        k = 1 << lev
        block = images[row:row + k].reshape(k, k, -1)[np.arange(k), np.arange(k)]
        spreads.append(block.max(axis=1) - block.min(axis=1))
        qs.extend(DyadicInterval(lev, i) for i in range(k))
        row += k
    return qs, np.concatenate(spreads)


def shift_oscillation_ratios(spec: HaarShiftSpec, f: StepFunction, lam: float = LAMBDA_OSC,
                             max_level: int | None = None) -> np.ndarray:
    """``omega_lam(H f, Q) / avg_{Q^tau} |f|`` for every dyadic ``Q`` up to ``max_level``.

    ``Q^tau`` may lie above the grid root; averages there see ``f = 0``.
    Entries with zero denominator are reported as ``nan`` when the
    oscillation vanishes too and ``inf`` otherwise.
    """
    g = StepFunction(f.depth, apply_shift_cells(spec, f.cells, check=False))
    osc = oscillation_by_level(g, lam)
    absavg = level_means(np.abs(f.cells))
    max_level = f.depth if max_level is None else min(max_level, f.depth)
    out = []
    for lev in range(max_level + 1):
        idx = np.arange(1 << lev)
        up = lev - spec.tau
        if up >= 0:
            den = absavg[up][idx >> spec.tau]
        else:
            den = np.full(idx.size, absavg[0][0] * 2.0 ** up)
        num = osc[lev]
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(np.where(den > 0, num / den, np.where(num > 0, np.inf, np.nan)))
    return np.concatenate(out)


@dataclass(frozen=True)
class Domination:
    mf_part: StepFunction
    F_part: StepFunction
    empirical_constant: float
    decomposition: LernerDecomposition

    def to_json(self) -> dict:
        return {"empirical_constant": self.empirical_constant,
                "mf_part": self.mf_part.cells.tolist(), "F_part": self.F_part.cells.tolist(),
                "decomposition": self.decomposition.to_json()}


def shift_domination(f: StepFunction, spec: HaarShiftSpec, root: DyadicInterval,
                     threshold: float = DEFAULT_THRESHOLD) -> Domination:
    """Least ``C`` with ``|H f - m_{H f}(root)| <= C (M^d f + F)`` on every cell of ``root``.

    ``F = sum_{k,j} avg_{P_j^k} |f| chi_{Q_j^k}`` with ``P_j^k`` the ``tau``-th
    ancestor of the parent of ``Q_j^k``; ancestors above the grid root are
    zero-padded super-roots.
    """
    spec.check_admissible()
    g = StepFunction(f.depth, apply_shift_cells(spec, f.cells, check=False))
    dec = decompose(g, root, threshold)
    mf = dyadic_maximal(f)
    F = np.zeros(f.n_cells)
    absf = StepFunction(f.depth, np.abs(f.cells))
    for _, q in dec.cubes():
        p = q.parent().ancestor(spec.tau, padding=spec.tau + 1)
        F[q.cell_slice(f.depth)] += average(absf, p)
    sl = root.cell_slice(f.depth)
    block = g.cells[sl]
    lhs = np.abs(block - median_interval(g, root).low)
    den = mf.cells[sl] + F[sl]
    tol = SLACK * max(1.0, float(np.max(np.abs(block))))
    nz = lhs > tol
    # M^d f >= avg |f| over [0, 1) everywhere, so this only guards f = 0 with nonzero output
    if np.any(nz & (den == 0)):
        raise DegenerateDomination("maximal part and F vanish where |H f - m| does not")
    const = float(np.max(lhs[nz] / den[nz])) if nz.any() else 0.0
    return Domination(mf, StepFunction(f.depth, F), const, dec)
