"""Canonical Haar system and Haar shift operators of index tau.

In one dimension every function meeting the Haar-function axioms on ``I``
(support in ``I``, constant on the halves, mean zero, sup-norm at most
``|I|^{-1/2}``) is ``c * h_I`` with ``|c| <= 1`` for the canonical
``h_I = |I|^{-1/2} (chi_{left half} - chi_{right half})``.  A general shift is
therefore stored in the canonical basis with the scalar folded into its
coefficient.

Shift coefficients live in flat arrays keyed by heap ids (see
:attr:`DyadicInterval.heap_id`), which is the layout the transform kernels
use directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dyadic import DyadicInterval, StepFunction
from .errors import (
    AdmissibilityViolation,
    DepthMismatch,
    DepthTooLarge,
    IntervalTooFine,
    ValidationError,
    ZeroFunction,
)

MAX_DENSE_CELLS = 4096
ADMISSIBILITY_SLACK = 1e-12


def _levels(heap_ids: np.ndarray) -> np.ndarray:
    # floor(log2) of positive int64 ids, exact for ids < 2**53
    return np.frexp(heap_ids.astype(float))[1].astype(np.int64) - 1


def haar_function(interval: DyadicInterval, depth: int) -> StepFunction:
    if interval.level < 0:
        raise ValidationError("Haar functions live on intervals inside the root")
    if interval.level > depth - 1:
        raise IntervalTooFine(f"h_I for {interval} needs depth >= {interval.level + 1}")
    cells = np.zeros(1 << depth)
    sl = interval.cell_slice(depth)
    half = (sl.stop - sl.start) // 2
    amp = 2.0 ** (interval.level / 2)
    cells[sl.start: sl.start + half] = amp
    cells[sl.start + half: sl.stop] = -amp
    return StepFunction(depth, cells)


@dataclass(frozen=True, eq=False)
class HaarExpansion:
    """``<f, h_I>`` for every ``I`` of level <= depth-1, plus the mean over the root."""

    depth: int
    coeffs: np.ndarray  # heap layout; slot 0 is the mean

    @property
    def mean(self) -> float:
        return float(self.coeffs[0])

    def __getitem__(self, interval: DyadicInterval) -> float:
        if interval.level > self.depth - 1:
            raise IntervalTooFine(f"no coefficient for {interval} at depth {self.depth}")
        return float(self.coeffs[interval.heap_id])

    def as_dict(self) -> dict[DyadicInterval, float]:
        return {DyadicInterval.from_heap_id(k): float(self.coeffs[k])
                for k in range(1, self.coeffs.size)}

    def reconstruct(self) -> StepFunction:
        return StepFunction(self.depth, kernels.haar_inverse(self.coeffs))


def haar_expand(f: StepFunction) -> HaarExpansion:
    return HaarExpansion(f.depth, kernels.haar_forward(f.cells))


@dataclass(frozen=True)
class TruncationPolicy:
    """Finite-depth restriction: only cubes ``Q`` of level <= depth - 1 - tau contribute.

    Every ``h_{Q'}``, ``h_{Q''}`` of an included term then has level <= depth - 1
    and is exactly resolved on the grid.
    """

    depth: int

    def max_cube_level(self, tau: int) -> int:
        return self.depth - 1 - tau


@dataclass(frozen=True, eq=False)
class HaarShiftSpec:
    """Sparse coefficients ``a(Q', Q'')`` attached to cubes ``Q``.

    ``q``, ``src`` (Q') and ``dst`` (Q'') hold heap ids; entry ``e`` contributes
    ``a[e] * <f, h_{src[e]}> * h_{dst[e]}``.
    """

    tau: int
    q: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    a: np.ndarray
    bound_constant: float
    name: str = ""
    _levels: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        arrays = [np.ascontiguousarray(x, dtype=np.int64) for x in (self.q, self.src, self.dst)]
        a = np.ascontiguousarray(self.a, dtype=float)
        if not all(x.shape == a.shape for x in arrays) or a.ndim != 1:
            raise ValidationError("entry arrays must be 1-D and of equal length")
        if self.tau < 0:
            raise ValidationError("tau must be nonnegative")
        if not self.bound_constant > 0:
            raise ValidationError("bound constant must be positive")
        if a.size and (min(x.min() for x in arrays) < 1):
            raise ValidationError("heap ids start at 1")
        for name, x in zip(("q", "src", "dst"), arrays):
            x.setflags(write=False)
            object.__setattr__(self, name, x)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "_levels", tuple(_levels(x) for x in arrays))

    @classmethod
    def from_entries(cls, tau: int, entries, bound_constant: float, name: str = ""):
        """``entries`` maps ``(Q, Q', Q'')`` triples of intervals to coefficients."""
        items = list(entries.items()) if isinstance(entries, dict) else list(entries)
        q = [k[0].heap_id for k, _ in items]
        src = [k[1].heap_id for k, _ in items]
        dst = [k[2].heap_id for k, _ in items]
        a = [float(v) for _, v in items]
        return cls(tau, np.array(q, dtype=np.int64), np.array(src, dtype=np.int64),
                   np.array(dst, dtype=np.int64), np.array(a), bound_constant, name)

    @property
    def n_entries(self) -> int:
        return int(self.a.size)

    @property
    def max_level(self) -> int:
        return int(self._levels[0].max()) if self.a.size else -1

    def entries(self) -> dict[tuple[DyadicInterval, DyadicInterval, DyadicInterval], float]:
        out = {}
        for q, s, d, a in zip(self.q, self.src, self.dst, self.a):
            key = tuple(DyadicInterval.from_heap_id(int(x)) for x in (q, s, d))
            out[key] = out.get(key, 0.0) + float(a)
        return out

    def admissibility_ratios(self) -> np.ndarray:
        """``|a| / ((|Q'| |Q''|)^{1/2} / |Q|)`` per entry."""
        lq, ls, ld = self._levels
        scale = np.exp2(lq - (ls + ld) / 2.0)
        return np.abs(self.a) / scale

    def check_admissible(self) -> "HaarShiftSpec":
        lq, ls, ld = self._levels
        for lev, ids, label in ((ls, self.src, "Q'"), (ld, self.dst, "Q''")):
            gap = lev - lq
            if np.any(gap < 0) or np.any(gap > self.tau):
                raise AdmissibilityViolation(
                    f"{label} must be at most tau={self.tau} generations below Q")
            if np.any((ids >> gap) != self.q):
                raise AdmissibilityViolation(f"{label} must be contained in Q")
        ratios = self.admissibility_ratios()
        if ratios.size and ratios.max() > self.bound_constant * (1 + ADMISSIBILITY_SLACK):
            e = int(np.argmax(ratios))
            raise AdmissibilityViolation(
                f"entry {e}: |a|={abs(self.a[e])} exceeds C (|Q'||Q''|)^(1/2)/|Q| "
                f"with C={self.bound_constant}")
        return self

    def included(self, policy: TruncationPolicy) -> np.ndarray:
        return self._levels[0] <= policy.max_cube_level(self.tau)

    def restricted(self, mask) -> "HaarShiftSpec":
        return HaarShiftSpec(self.tau, self.q[mask], self.src[mask], self.dst[mask],
                             self.a[mask], self.bound_constant, self.name)

    def to_json(self) -> dict:
        def pair(h):
            return DyadicInterval.from_heap_id(int(h)).to_list()

        return {
            "tau": self.tau,
            "bound_constant": self.bound_constant,
            "entries": [
                {"q": pair(q), "qp": pair(s), "qpp": pair(d), "a": float(a)}
                for q, s, d, a in zip(self.q, self.src, self.dst, self.a)
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "HaarShiftSpec":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        if isinstance(obj, dict) and obj.get("name") == "hd":
            return dyadic_hilbert_spec(int(obj["depth"]))
        try:
            items = [
                ((DyadicInterval(*e["q"]), DyadicInterval(*e["qp"]), DyadicInterval(*e["qpp"])),
                 float(e["a"]))
                for e in obj["entries"]
            ]
            spec = cls.from_entries(int(obj["tau"]), items, float(obj["bound_constant"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed shift spec: {exc}") from exc
        return spec.check_admissible()


def dyadic_hilbert_spec(depth: int) -> HaarShiftSpec:
    """``H^d f = sum_I <f, h_I> (h_{I-} - h_{I+})`` truncated to depth ``depth``."""
    if depth < 2:
        raise ValidationError("the dyadic Hilbert transform needs depth >= 2")
    ids = np.arange(1, 1 << (depth - 1), dtype=np.int64)  # levels 0..depth-2
    q = np.repeat(ids, 2)
    dst = np.empty_like(q)
    dst[0::2] = 2 * ids
    dst[1::2] = 2 * ids + 1
    a = np.tile([1.0, -1.0], ids.size)
    return HaarShiftSpec(1, q, q.copy(), dst, a, math.sqrt(2.0), name="hd")


def named_spec(name: str, depth: int) -> HaarShiftSpec:
    if name == "hd":
        return dyadic_hilbert_spec(depth)
    raise ValidationError(f"unknown built-in spec {name!r}")


def _descendants(node: int, generations: int) -> list[int]:
    out = []
    for g in range(generations + 1):
        base = node << g
        out.extend(range(base, base + (1 << g)))
    return out


def random_spec(tau: int, depth: int, seed: int, density: float = 0.5,
                bound_constant: float = 1.0) -> HaarShiftSpec:
    """Random admissible spec with coefficients uniform in the admissible range.

    Coefficients for a cube ``Q`` come from a generator keyed on
    ``(seed, tau, Q)``, so the spec at a deeper truncation extends the
    shallower one.
    """
    if not 0.0 <= density <= 1.0:
        raise ValidationError("density must lie in [0, 1]")
    qs, srcs, dsts, amps = [], [], [], []
    for level in range(depth - tau):
        for index in range(1 << level):
            node = (1 << level) + index
            rng = np.random.default_rng([seed, tau, level, index])
            desc = np.array(_descendants(node, tau), dtype=np.int64)
            src, dst = np.meshgrid(desc, desc, indexing="ij")
            src, dst = src.ravel(), dst.ravel()
            keep = rng.random(src.size) < density
            bound = bound_constant * np.exp2(level - (_levels(src) + _levels(dst)) / 2.0)
            a = rng.uniform(-1.0, 1.0, src.size) * bound
            qs.append(np.full(int(keep.sum()), node, dtype=np.int64))
            srcs.append(src[keep])
            dsts.append(dst[keep])
            amps.append(a[keep])
    cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dtype=dt))
    return HaarShiftSpec(tau, cat(qs, np.int64), cat(srcs, np.int64), cat(dsts, np.int64),
                         cat(amps, float), bound_constant, name=f"random(tau={tau},seed={seed})")


def _shift_coefficients(spec: HaarShiftSpec, coeffs: np.ndarray, depth: int) -> np.ndarray:
    mask = spec.included(TruncationPolicy(depth))
    return kernels.scatter_shift(coeffs, spec.src[mask], spec.dst[mask], spec.a[mask])


def apply_shift(spec: HaarShiftSpec, f: StepFunction, policy: TruncationPolicy | None = None,
                check: bool = True) -> StepFunction:
    if policy is None:
        policy = TruncationPolicy(f.depth)
    if policy.depth != f.depth:
        raise DepthMismatch(f"policy depth {policy.depth} != function depth {f.depth}")
    if check:
        spec.check_admissible()
    return StepFunction(f.depth, apply_shift_cells(spec, f.cells, check=False))


def apply_shift_cells(spec: HaarShiftSpec, cells, check: bool = True) -> np.ndarray:
    """Cell-array form of :func:`apply_shift`; accepts batches along the last axis."""
    if check:
        spec.check_admissible()
    cells = np.asarray(cells, dtype=float)
    depth = cells.shape[-1].bit_length() - 1
    coeffs = kernels.haar_forward(cells)
    return kernels.haar_inverse(_shift_coefficients(spec, coeffs, depth))


def adjoint_spec(spec: HaarShiftSpec) -> HaarShiftSpec:
    name = spec.name[:-1] if spec.name.endswith("*") else (spec.name + "*" if spec.name else "")
    return HaarShiftSpec(spec.tau, spec.q, spec.dst, spec.src, spec.a, spec.bound_constant, name)


def assemble_matrix(spec: HaarShiftSpec, depth: int) -> np.ndarray:
    """Dense ``2^D x 2^D`` matrix acting on cell values; column j = image of cell j's indicator."""
    n = 1 << depth
    if n > MAX_DENSE_CELLS:
        raise DepthTooLarge(f"dense assembly limited to {MAX_DENSE_CELLS} cells, got {n}")
    images = apply_shift_cells(spec, np.eye(n))
    return np.ascontiguousarray(images.T)


def weak11_ratio(spec: HaarShiftSpec, f: StepFunction) -> float:
    """``sup_t t |{|H f| > t}| / ||f||_1`` for one function, exact over t."""
    l1 = float(np.abs(f.cells).sum()) * f.cell_width
    if l1 == 0.0:
        raise ZeroFunction("weak (1,1) ratio needs ||f||_1 > 0")
    g = np.sort(np.abs(apply_shift(spec, f).cells))[::-1]
    counts = np.arange(1, g.size + 1)
    return float(np.max(g * counts) * f.cell_width / l1)


def weak11_constant(spec: HaarShiftSpec, fs) -> float:
    fs = list(fs)
    if not fs:
        raise ValidationError("need at least one test function")
    return max(weak11_ratio(spec, f) for f in fs)
