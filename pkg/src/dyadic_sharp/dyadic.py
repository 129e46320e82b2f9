"""Dyadic intervals over the root [0, 1) and step functions on uniform dyadic grids.

A :class:`DyadicInterval` with ``level >= 0`` denotes
``[index * 2**-level, (index + 1) * 2**-level)``.  Negative levels denote the
zero-padding super-roots ``[0, 2**-level)`` (index is always 0 there); they
only appear when a caller explicitly grants padding headroom.

A :class:`StepFunction` of depth ``D`` stores the ``2**D`` cell values of a
function constant on each cell ``[i 2**-D, (i+1) 2**-D)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import (
    AncestorAboveRoot,
    DepthMismatch,
    IntervalTooFine,
    NonpositiveWeight,
    ValidationError,
)

MAX_TOTAL_LEVELS = 30


@dataclass(frozen=True, order=True)
class DyadicInterval:
    level: int
    index: int

    def __post_init__(self):
        if self.level >= 0:
            if not 0 <= self.index < (1 << self.level):
                raise ValidationError(f"index {self.index} out of range for level {self.level}")
        elif self.index != 0:
            raise ValidationError("super-root intervals (negative level) have index 0")

    @property
    def length(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def start(self) -> Fraction:
        return Fraction(self.index) / Fraction(2) ** self.level

    @property
    def end(self) -> Fraction:
        return Fraction(self.index + 1) / Fraction(2) ** self.level

    @property
    def heap_id(self) -> int:
        """Position of this interval in the heap layout (root = 1)."""
        if self.level < 0:
            raise ValidationError("super-root intervals have no heap position")
        return (1 << self.level) + self.index

    @classmethod
    def from_heap_id(cls, node: int) -> "DyadicInterval":
        level = int(node).bit_length() - 1
        return cls(level, node - (1 << level))

    def parent(self, padding: int = 0) -> "DyadicInterval":
        return self.ancestor(1, padding)

    def children(self) -> tuple["DyadicInterval", "DyadicInterval"]:
        if self.level < 0:
            # the upper half of a super-root has no root-grid coordinates
            raise AncestorAboveRoot(f"children of super-root {self} need padded coordinates")
        return (DyadicInterval(self.level + 1, 2 * self.index),
                DyadicInterval(self.level + 1, 2 * self.index + 1))

    def ancestor(self, tau: int, padding: int = 0) -> "DyadicInterval":
        if tau < 0:
            raise ValidationError("tau must be nonnegative")
        if self.level - tau < -padding:
            raise AncestorAboveRoot(
                f"{self} has no {tau}-th ancestor with {padding} padding level(s)")
        level = self.level - tau
        return DyadicInterval(level, self.index >> tau if level >= 0 else 0)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.level < self.level:
            return False
        if self.level < 0:
            # every representable interval starts at 0 or inside the root
            return True
        return (other.index >> (other.level - self.level)) == self.index

    def relation(self, other: "DyadicInterval") -> str:
        """One of ``equal``, ``contains``, ``inside``, ``disjoint``."""
        if self == other:
            return "equal"
        if self.contains(other):
            return "contains"
        if other.contains(self):
            return "inside"
        return "disjoint"

    def cell_slice(self, depth: int) -> slice:
        """Cells of a depth-``depth`` grid on [0, 1) covered by this interval."""
        if self.level > depth:
            raise IntervalTooFine(f"{self} is finer than depth {depth}")
        if self.level < 0:
            return slice(0, 1 << depth)
        width = 1 << (depth - self.level)
        return slice(self.index * width, (self.index + 1) * width)

    def to_list(self) -> list[int]:
        return [self.level, self.index]

    def __str__(self):
        return f"[{self.start}, {self.end})"


ROOT = DyadicInterval(0, 0)


class Relations(NamedTuple):
    parent: DyadicInterval
    children: tuple[DyadicInterval, DyadicInterval]
    ancestor: DyadicInterval


def interval_relations(interval: DyadicInterval, tau: int, padding: int = 0) -> Relations:
    return Relations(interval.parent(padding), interval.children(),
                     interval.ancestor(tau, padding))


def to_padded(interval: DyadicInterval, padding: int) -> DyadicInterval:
    """Re-express ``interval`` in the coordinates of the super-root [0, 2**padding)."""
    if interval.level < -padding:
        raise AncestorAboveRoot(f"{interval} lies above the padded root")
    return DyadicInterval(interval.level + padding, interval.index)


def intervals_at(level: int):
    return [DyadicInterval(level, i) for i in range(1 << level)]


def all_intervals(depth: int):
    """Every dyadic interval of level 0..depth, coarse to fine."""
    return [I for level in range(depth + 1) for I in intervals_at(level)]


@dataclass(frozen=True)
class GridConfig:
    depth: int
    super_root_levels: int = 0

    def __post_init__(self):
        if self.depth < 1:
            raise ValidationError("depth must be >= 1")
        if self.super_root_levels < 0:
            raise ValidationError("super_root_levels must be >= 0")
        if self.depth + self.super_root_levels > MAX_TOTAL_LEVELS:
            raise ValidationError(
                f"depth + super_root_levels must be <= {MAX_TOTAL_LEVELS}")


@dataclass(frozen=True, eq=False)
class StepFunction:
    depth: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.array(self.cells, dtype=float)
        if self.depth < 0 or self.depth > MAX_TOTAL_LEVELS:
            raise ValidationError(f"bad depth {self.depth}")
        if cells.shape != (1 << self.depth,):
            raise DepthMismatch(
                f"depth {self.depth} needs {1 << self.depth} cells, got shape {cells.shape}")
        if not np.all(np.isfinite(cells)):
            raise ValidationError("cell values must be finite")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @classmethod
    def constant(cls, value: float, depth: int) -> "StepFunction":
        return cls(depth, np.full(1 << depth, float(value)))

    @property
    def n_cells(self) -> int:
        return 1 << self.depth

    @property
    def cell_width(self) -> float:
        return 2.0 ** (-self.depth)

    def integral(self) -> float:
        return tree_sum(self.cells) * self.cell_width

    def is_weight(self) -> bool:
        return bool(np.all(self.cells > 0))

    def check_weight(self) -> "StepFunction":
        if not self.is_weight():
            raise NonpositiveWeight("weight cells must be strictly positive")
        return self

    def restrict(self, interval: DyadicInterval) -> np.ndarray:
        return self.cells[interval.cell_slice(self.depth)]

    def with_cells(self, cells) -> "StepFunction":
        return StepFunction(self.depth, cells)

    def to_json(self) -> dict:
        return {"depth": self.depth, "cells": [float(v) for v in self.cells]}

    @classmethod
    def from_json(cls, obj, weight: bool = False) -> "StepFunction":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        try:
            f = cls(int(obj["depth"]), np.asarray(obj["cells"], dtype=float))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed step function: {exc}") from exc
        return f.check_weight() if weight else f

    def __repr__(self):
        return f"StepFunction(depth={self.depth}, cells={np.array2string(self.cells, threshold=8)})"


def tree_sum(values: np.ndarray) -> float:
    """Pairwise sum of a power-of-two length array, bottom-up."""
    x = np.asarray(values, dtype=float)
    while x.shape[-1] > 1:
        x = x[..., 0::2] + x[..., 1::2]
    return x[..., 0] if x.ndim > 1 else float(x[0])


def level_sums(cells: np.ndarray) -> list[np.ndarray]:
    """``sums[l][i]`` is the pairwise sum of the cells inside interval (l, i).

    Shares its summation tree with :func:`tree_sum`, so
    ``level_sums(c)[l][i] == tree_sum(c[block])`` holds bitwise.
    """
    x = np.asarray(cells, dtype=float)
    depth = x.shape[-1].bit_length() - 1
    out = [None] * (depth + 1)
    out[depth] = x
    for level in range(depth - 1, -1, -1):
        x = x[..., 0::2] + x[..., 1::2]
        out[level] = x
    return out


def level_means(cells: np.ndarray) -> list[np.ndarray]:
    sums = level_sums(cells)
    depth = len(sums) - 1
    return [s / float(1 << (depth - level)) for level, s in enumerate(sums)]


def average(f: StepFunction, interval: DyadicInterval) -> float:
    """Mean of ``f`` over ``interval``; zero extension above the root."""
    if interval.level > f.depth:
        raise IntervalTooFine(f"{interval} is finer than depth {f.depth}")
    block = f.cells[interval.cell_slice(f.depth)]
    total = tree_sum(block)
    if interval.level >= 0:
        return total / block.size
    return total / (block.size * 2.0 ** (-interval.level))


def refine(f: StepFunction, depth: int) -> StepFunction:
    if depth < f.depth:
        raise ValidationError(f"cannot refine depth {f.depth} to coarser depth {depth}")
    return StepFunction(depth, np.repeat(f.cells, 1 << (depth - f.depth)))


def zero_pad_embed(f: StepFunction, levels: int) -> StepFunction:
    """Extend ``f`` by zero to the super-root [0, 2**levels).

    The result is a step function on its own root (the super-root) at depth
    ``f.depth + levels``; the original root occupies its first ``2**f.depth``
    cells.
    """
    if levels < 0:
        raise ValidationError("padding levels must be >= 0")
    if f.depth + levels > MAX_TOTAL_LEVELS:
        raise ValidationError("padded depth exceeds the index budget")
    cells = np.zeros(1 << (f.depth + levels))
    cells[: f.n_cells] = f.cells
    return StepFunction(f.depth + levels, cells)


def unpad(f: StepFunction, levels: int) -> StepFunction:
    """Restrict a padded function back to the original root [0, 1)."""
    return StepFunction(f.depth - levels, f.cells[: 1 << (f.depth - levels)])
