"""Random test functions.

``random_step_function`` draws cell values directly.  ``Profile`` is a fixed
function on [0, 1) (cosines plus jumps at non-dyadic points) whose exact
cell averages can be taken at any depth, so depth-stability checks compare
discretizations of the same function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import StepFunction

KINDS = ("normal", "integer", "walk", "cauchy", "sparse")


def random_step_function(rng: np.random.Generator, depth: int, kind: str | None = None) -> StepFunction:
    n = 1 << depth
    if kind is None:
        kind = KINDS[int(rng.integers(len(KINDS)))]
    if kind == "normal":
        cells = rng.standard_normal(n) * rng.lognormal()
    elif kind == "integer":
        cells = rng.integers(-4, 5, n).astype(float)
    elif kind == "walk":
        cells = np.cumsum(rng.standard_normal(n))
    elif kind == "cauchy":
        cells = rng.standard_cauchy(n)
    elif kind == "sparse":
        cells = np.where(rng.random(n) < 0.1, rng.standard_normal(n) * 10, 0.0)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return StepFunction(depth, cells)


def random_weight(rng: np.random.Generator, depth: int) -> StepFunction:
    """Strictly positive weight with a few orders of magnitude of spread."""
    n = 1 << depth
    return StepFunction(depth, np.exp(rng.standard_normal(n) * rng.uniform(0.1, 2.5)))


@dataclass(frozen=True)
class Profile:
    amps: np.ndarray
    freqs: np.ndarray
    phases: np.ndarray
    jumps: np.ndarray    # positions in (0, 1)
    heights: np.ndarray

    @classmethod
    def random(cls, rng: np.random.Generator, n_waves: int = 4, n_jumps: int = 3) -> "Profile":
        return cls(rng.standard_normal(n_waves), rng.uniform(0.5, 6.0, n_waves),
                   rng.uniform(0, 2 * np.pi, n_waves), rng.uniform(0, 1, n_jumps),
                   rng.standard_normal(n_jumps) * 2)

    def antiderivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        w = 2 * np.pi * self.freqs
        waves = self.amps * (np.sin(w * x + self.phases) - np.sin(self.phases)) / w
        steps = self.heights * np.maximum(x - self.jumps, 0.0)
        return waves.sum(axis=-1) + steps.sum(axis=-1)

    def cells(self, depth: int) -> StepFunction:
        n = 1 << depth
        prim = self.antiderivative(np.arange(n + 1) / n)
        return StepFunction(depth, np.diff(prim) * n)
