import json

import numpy as np
import pytest

from dyadic_sharp.dyadic import ROOT, DyadicInterval, StepFunction, all_intervals, level_means
from dyadic_sharp.errors import BadQuantile, DegenerateDomination, IntervalTooFine, ValidationError
from dyadic_sharp.haar import apply_shift, dyadic_hilbert_spec, random_spec
from dyadic_sharp.lerner import (LernerDecomposition, decompose, far_part_spreads,
                                 shift_oscillation_ratios, oscillation_rhs, shift_domination,
                                 verify_decomposition)
from dyadic_sharp.rearrangement import local_mean_oscillation
from dyadic_sharp.samples import Profile, random_step_function
from dyadic_sharp.selftest import tamper_base_function
from dyadic_sharp.weighted import dyadic_maximal

PROPERTIES = ("containment", "disjointness", "nesting", "half_measure", "exceptional_disjointness",
              "exceptional_measure", "generation_count", "pointwise_bound")


# -- independent oracles -------------------------------------------------------

def decompose_oracle(f, root, theta=0.25):
    """Loop over every candidate interval, top-down, keeping the maximal dense ones."""
    gens, current = [], [root]
    while current:
        nxt = []
        for p in current:
            block = f.cells[p.cell_slice(f.depth)]
            b = np.sort(block)
            m = b[(b.size + 1) // 2 - 1]
            dev = np.abs(block - m)
            # smallest t with #{dev > t} <= floor(theta * size)
            allowed = int(np.floor(theta * block.size))
            t = min(v for v in {0.0, *dev.tolist()} if np.count_nonzero(dev > v) <= allowed)
            exc = np.zeros(f.n_cells, dtype=bool)
            exc[p.cell_slice(f.depth)] = np.abs(f.cells[p.cell_slice(f.depth)] - m) > t
            chosen = []
            for q in all_intervals(f.depth):
                if not p.contains(q) or q == p or any(c.contains(q) for c in chosen):
                    continue
                sl = q.cell_slice(f.depth)
                if 2 * np.count_nonzero(exc[sl]) > sl.stop - sl.start:
                    chosen.append(q)
            nxt.extend(chosen)
        if not nxt:
            break
        gens.append(tuple(sorted(nxt)))
        current = nxt
    return tuple(gens)


def rhs_oracle(f, dec, c_sharp=4.0, c_osc=4.0):
    """Per cell: chain sup of omega_{1/4} plus the sum over containing cubes of omega_{1/8}(parent)."""
    out = np.zeros(f.n_cells)
    for cell in range(f.n_cells):
        if not dec.root.contains(DyadicInterval(f.depth, cell)):
            continue
        chain = [DyadicInterval(lev, cell >> (f.depth - lev)) for lev in range(dec.root.level, f.depth + 1)]
        sharp = max(local_mean_oscillation(f, q, 0.25) for q in chain)
        osc = sum(local_mean_oscillation(f, q.parent(), 0.125)
                  for _, q in dec.cubes() if q.contains(DyadicInterval(f.depth, cell)))
        out[cell] = c_sharp * sharp + c_osc * osc
    return out


# -- examples ------------------------------------------------------------------

def test_spike_example():
    f = StepFunction(3, [8, 0, 0, 0, 0, 0, 0, 0])
    dec = decompose(f, ROOT)
    assert dec.generations == ((DyadicInterval(3, 0),),)
    rep = verify_decomposition(f, dec)
    assert rep.ok
    rhs = oscillation_rhs(f, dec).cells
    assert rhs[0] == 32.0
    assert np.array_equal(rhs, rhs_oracle(f, dec))
    assert abs(f.cells[0] - 0.0) <= rhs[0]


def test_constant_has_no_cubes():
    for depth in (1, 4, 8):
        f = StepFunction.constant(-2.0, depth)
        dec = decompose(f, ROOT)
        assert dec.generations == () and dec.n_cubes() == 0
        rep = verify_decomposition(f, dec)
        assert rep.ok and rep.least_constant == 0.0
        assert not oscillation_rhs(f, dec).cells.any()


def test_threshold_validation():
    f = StepFunction(2, [1, 2, 3, 4])
    for bad in (0.0, 0.5, 0.7):
        with pytest.raises(BadQuantile):
            decompose(f, ROOT, bad)
    with pytest.raises(IntervalTooFine):
        decompose(f, DyadicInterval(3, 0))


def test_matches_loop_oracle(rng):
    for _ in range(60):
        depth = int(rng.integers(2, 7))
        f = random_step_function(rng, depth)
        assert decompose(f, ROOT).generations == decompose_oracle(f, ROOT)
    f = random_step_function(rng, 6)
    sub = DyadicInterval(2, 3)
    assert decompose(f, sub).generations == decompose_oracle(f, sub)


def test_rhs_matches_oracle(rng):
    for _ in range(15):
        f = random_step_function(rng, 5)
        dec = decompose(f, ROOT)
        assert np.allclose(oscillation_rhs(f, dec).cells, rhs_oracle(f, dec), rtol=1e-13, atol=1e-13)


def test_random_functions_verify(rng):
    worst = 0.0
    for _ in range(100):
        f = random_step_function(rng, 8)
        rep = verify_decomposition(f, decompose(f, ROOT))
        assert rep.ok, [r.to_json() for r in rep.failures()]
        assert [r.name for r in rep.results] == list(PROPERTIES)
        worst = max(worst, rep.least_constant)
    assert worst <= 4.0


def test_subroot_decomposition(rng):
    f = random_step_function(rng, 7)
    root = DyadicInterval(3, 5)
    dec = decompose(f, root)
    assert all(root.contains(q) and q != root for _, q in dec.cubes())
    assert verify_decomposition(f, dec).ok
    rhs = oscillation_rhs(f, dec).cells
    outside = np.ones(f.n_cells, dtype=bool)
    outside[root.cell_slice(7)] = False
    assert not rhs[outside].any()


def test_generations_shrink_geometrically(rng):
    for _ in range(20):
        f = random_step_function(rng, 8)
        dec = decompose(f, ROOT)
        sizes = [dec.omega_mask(k).sum() for k in range(len(dec.generations) + 1)]
        assert all(2 * b <= a for a, b in zip(sizes, sizes[1:]))


def test_mirror_symmetry(rng):
    for _ in range(20):
        f = random_step_function(rng, 6, "integer")
        dec = decompose(f, ROOT)
        mirrored = decompose(StepFunction(6, f.cells[::-1]), ROOT)
        flip = tuple(tuple(sorted(DyadicInterval(q.level, (1 << q.level) - 1 - q.index) for q in g))
                     for g in dec.generations)
        # reversal keeps every block's multiset, so medians and thresholds carry over
        assert mirrored.generations == flip
        assert verify_decomposition(StepFunction(6, f.cells[::-1]), mirrored).ok


def test_json_roundtrip(rng):
    f = random_step_function(rng, 6)
    dec = decompose(f, ROOT)
    back = LernerDecomposition.from_json(json.loads(json.dumps(dec.to_json())), 6)
    assert back == dec
    with pytest.raises(ValidationError):
        LernerDecomposition.from_json({"root": [0, 0]}, 6)


def test_tamper_detected():
    f = tamper_base_function()
    dec = decompose(f, ROOT)
    assert verify_decomposition(f, dec).ok
    assert len(dec.generations) >= 2
    rep = verify_decomposition(f, dec.without(1, 0))
    assert not rep.ok
    names = {r.name for r in rep.failures()}
    assert {"nesting", "pointwise_bound"} <= names
    assert all(r.cell is not None for r in rep.failures())


def test_foreign_cube_fails_containment():
    f = StepFunction(3, np.arange(8.0))
    dec = LernerDecomposition(DyadicInterval(1, 0), ((DyadicInterval(2, 3),),), 3)
    rep = verify_decomposition(f, dec)
    assert not rep["containment"].ok


def test_overlap_fails_disjointness():
    f = StepFunction(3, np.arange(8.0))
    dec = LernerDecomposition(ROOT, ((DyadicInterval(1, 0), DyadicInterval(2, 0)),), 3)
    rep = verify_decomposition(f, dec)
    assert not rep["disjointness"].ok and rep["disjointness"].cell == 0


# -- shift estimates-----------------------------------------------------------

def test_far_part_constant_on_cubes(rng):
    for tau in (0, 1, 2):
        spec = random_spec(tau, 7, seed=tau)
        for _ in range(5):
            f = random_step_function(rng, 7)
            _, spreads = far_part_spreads(spec, f)
            assert spreads.max() <= 1e-12 * max(1.0, np.abs(f.cells).max())


def test_far_part_oracle_single_interval(rng):
    spec = random_spec(1, 6, seed=2)
    f = random_step_function(rng, 6)
    qs, spreads = far_part_spreads(spec, f)
    q = DyadicInterval(3, 5)
    anc = q.ancestor(1)
    far = f.cells.copy()
    far[anc.cell_slice(6)] = 0.0
    g = apply_shift(spec, StepFunction(6, far)).cells[q.cell_slice(6)]
    assert spreads[qs.index(q)] == pytest.approx(g.max() - g.min(), abs=1e-14)


def test_oscillation_ratios_finite(rng):
    spec = dyadic_hilbert_spec(7)
    f = random_step_function(rng, 7)
    r = shift_oscillation_ratios(spec, f)
    assert r.size == (1 << 8) - 1
    assert np.all(np.isfinite(r[~np.isnan(r)]))


def test_oscillation_ratio_oracle(rng):
    spec = random_spec(2, 5, seed=1)
    f = random_step_function(rng, 5)
    g = apply_shift(spec, f)
    r = shift_oscillation_ratios(spec, f, 0.125)
    absavg = level_means(np.abs(f.cells))
    for i, q in enumerate(all_intervals(5)):
        up = q.level - 2
        den = absavg[up][q.index >> 2] if up >= 0 else absavg[0][0] * 2.0 ** up
        if den > 0:
            assert r[i] == pytest.approx(local_mean_oscillation(g, q, 0.125) / den, rel=1e-12)


def test_domination_hilbert(rng):
    spec = dyadic_hilbert_spec(6)
    for _ in range(10):
        f = Profile.random(rng).cells(6)
        d = shift_domination(f, spec, ROOT)
        assert np.isfinite(d.empirical_constant) and d.empirical_constant > 0
        assert np.array_equal(d.mf_part.cells, dyadic_maximal(f).cells)
        assert np.all(d.F_part.cells >= 0)
        g = apply_shift(spec, f).cells
        lhs = np.abs(g - np.sort(g)[(g.size + 1) // 2 - 1])
        assert np.all(lhs <= d.empirical_constant * (d.mf_part.cells + d.F_part.cells) * (1 + 1e-12) + 1e-12)


def test_domination_F_oracle(rng):
    spec = random_spec(1, 5, seed=3)
    f = random_step_function(rng, 5)
    d = shift_domination(f, spec, ROOT)
    expect = np.zeros(32)
    for _, q in d.decomposition.cubes():
        p = q.parent().ancestor(1, padding=2)
        # zero extension: average over p of |f| restricted to [0, 1)
        lo, hi = max(0.0, float(p.start)), min(1.0, float(p.end))
        cells = np.abs(f.cells)[int(lo * 32):int(hi * 32)]
        expect[q.cell_slice(5)] += cells.sum() / 32 / float(p.end - p.start)
    assert np.allclose(d.F_part.cells, expect, rtol=1e-13, atol=0)


def test_domination_zero_function():
    d = shift_domination(StepFunction.constant(0.0, 4), dyadic_hilbert_spec(4), ROOT)
    assert d.empirical_constant == 0.0 and d.decomposition.n_cubes() == 0


def test_domination_denominator_positive_for_nonzero_f():
    # M^d f >= avg |f| over [0, 1) everywhere, so the degenerate branch needs f = 0
    from dyadic_sharp.haar import HaarShiftSpec
    spec = HaarShiftSpec.from_entries(1, {(ROOT, DyadicInterval(1, 1), DyadicInterval(1, 0)): 0.5}, 1.0)
    f = StepFunction(4, [0.0] * 8 + [1.0] * 4 + [-1.0] * 4)
    assert np.all(dyadic_maximal(f).cells >= 0.5)
    d = shift_domination(f, spec, ROOT)
    assert np.isfinite(d.empirical_constant) and d.empirical_constant > 0
    assert issubclass(DegenerateDomination, Exception)


def test_spike_oscillation_term():
    f = StepFunction(3, [16, 0, 0, 0, 0, 0, 0, 0])
    dec = decompose(f, ROOT)
    osc_only = oscillation_rhs(f, dec, c_sharp=0.0, c_osc=4.0).cells
    # omega_{1/8} on the parent [0, 1/4) is 8, attained at c = 8
    assert local_mean_oscillation(f, DyadicInterval(2, 0), 0.125) == 8.0
    assert osc_only[0] == 32.0 and not osc_only[1:].any()
    assert oscillation_rhs(f, dec).cells[0] >= 16.0


def test_domination_root_haar():
    from dyadic_sharp.haar import haar_function
    d = shift_domination(haar_function(ROOT, 4), dyadic_hilbert_spec(4), ROOT)
    assert np.isfinite(d.empirical_constant) and d.empirical_constant > 0
