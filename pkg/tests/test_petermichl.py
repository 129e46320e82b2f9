import math

import numpy as np
import pytest
from scipy import integrate

from dyadic_sharp.dyadic import StepFunction, zero_pad_embed
from dyadic_sharp.errors import ValidationError
from dyadic_sharp.haar import apply_shift, dyadic_hilbert_spec
from dyadic_sharp.petermichl import (grid_parameters, hilbert_compare, hilbert_indicator,
                                     hilbert_indicator_cells, indicator_cells, petermichl_average)
from dyadic_sharp.samples import random_step_function


def test_closed_form_value():
    assert hilbert_indicator(2.0, 0.0, 1.0) == pytest.approx(math.log(2) / math.pi, rel=1e-15)
    # principal value (1/pi) p.v. int_0^1 dy / (x - y), via the Cauchy-weighted quadrature
    for x in (2.0, 0.3, -0.5):
        if 0 < x < 1:
            pv, _ = integrate.quad(lambda y: -1.0, 0, 1, weight="cauchy", wvar=x)
        else:
            pv, _ = integrate.quad(lambda y: 1.0 / (x - y), 0, 1)
        assert hilbert_indicator(x, 0.0, 1.0) == pytest.approx(pv / math.pi, rel=1e-10)


def test_closed_form_cells_exact():
    cells = hilbert_indicator_cells(0.25, 0.5, 5).cells
    for i in (0, 3, 7, 20, 31):
        lo, hi = i / 32, (i + 1) / 32
        val, _ = integrate.quad(lambda x: hilbert_indicator(x, 0.25, 0.5), lo, hi,
                                points=[p for p in (0.25, 0.5) if lo < p < hi] or None)
        assert cells[i] == pytest.approx(val * 32, rel=1e-9, abs=1e-12)


def test_indicator_cells():
    assert indicator_cells(0.25, 0.5, 2).cells.tolist() == [0, 1, 0, 0]
    assert indicator_cells(0.3, 0.5, 2).cells.tolist() == pytest.approx([0, 0.8, 0, 0])


def test_grid_parameters():
    th, t = grid_parameters(8, 4, seed=1)
    assert th[0] == 0.0 and t[0] == 1.0
    assert np.all((th >= 0) & (th < 1)) and np.all((t >= 1) & (t < 2))
    # one sample per stratum
    assert np.array_equal(np.floor(th * 8), np.arange(8))
    with pytest.raises(ValidationError):
        grid_parameters(0, 1, 0)


def test_identity_grid_matches_padded_shift(rng):
    for _ in range(5):
        f = random_step_function(rng, 6)
        out = petermichl_average(f, 1, 1, padding=4).cells
        padded = zero_pad_embed(f, 4)
        ref = apply_shift(dyadic_hilbert_spec(10), padded).cells[:64]
        assert np.allclose(out, ref, rtol=0, atol=1e-13 * np.abs(f.cells).max())


def test_linear_and_deterministic(rng):
    f, g = random_step_function(rng, 6), random_step_function(rng, 6)
    a = petermichl_average(StepFunction(6, 2 * f.cells - g.cells), 4, 2, seed=3).cells
    b = 2 * petermichl_average(f, 4, 2, seed=3).cells - petermichl_average(g, 4, 2, seed=3).cells
    assert np.allclose(a, b, rtol=0, atol=1e-12)
    assert np.array_equal(petermichl_average(f, 4, 2, seed=3).cells, petermichl_average(f, 4, 2, seed=3).cells)


def test_padding_validation():
    with pytest.raises(ValidationError):
        petermichl_average(StepFunction.constant(1.0, 3), padding=1)
    with pytest.raises(ValidationError):
        hilbert_compare(0.5, 0.25, 1, 1, 6)


def test_averaging_improves_fit():
    coarse = hilbert_compare(0.25, 0.5, 4, 1, 8, seed=0)
    fine = hilbert_compare(0.25, 0.5, 64, 4, 8, seed=0)
    assert fine.rel_error < coarse.rel_error
    assert fine.scale < 0
    assert fine.n_cells_used > 100
