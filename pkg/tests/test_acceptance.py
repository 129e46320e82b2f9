"""Acceptance criteria 1-12.  Each test records one line into the terminal summary."""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from dyadic_sharp.dyadic import ROOT, DyadicInterval, StepFunction, all_intervals
from dyadic_sharp.errors import DegenerateDomination
from dyadic_sharp.haar import assemble_matrix, dyadic_hilbert_spec, haar_function, random_spec
from dyadic_sharp.lerner import (decompose, far_part_spreads, shift_oscillation_ratios,
                                 shift_domination, verify_decomposition)
from dyadic_sharp.petermichl import hilbert_compare
from dyadic_sharp.rearrangement import (local_mean_oscillation, median, median_interval,
                                        rearrangement_at, weak_lp_norm)
from dyadic_sharp.samples import Profile, random_step_function, random_weight
from dyadic_sharp.sweep import run_sweep
from dyadic_sharp.weighted import weighted_dyadic_maximal, weighted_lp_norm, weighted_operator_norm

SQ2 = math.sqrt(2.0)
SLACK = 1e-12


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


# -- 1 ---------------------------------------------------------------------------

def test_c01_haar_orthonormality():
    start = time.perf_counter()
    depth = 10
    n = 1 << depth
    rows = [np.ones(n)] + [haar_function(q, depth).cells for q in all_intervals(depth - 1)]
    basis = np.array(rows)
    gram = basis @ basis.T / n
    err = float(np.max(np.abs(gram - np.eye(n))))
    elapsed = time.perf_counter() - start
    record("1", basis.shape == (n, n) and err <= 1e-10 and elapsed < 10,
           f"{n} functions, max |G - I| = {err:.2e}, {elapsed:.2f} s")


# -- 2 ---------------------------------------------------------------------------

def test_c02_unweighted_norm_sqrt2():
    # oracle: singular values of the depth-4 matrix built from explicit rank-one Haar terms
    oracle = np.zeros((16, 16))
    for q in all_intervals(2):
        left, right = q.children()
        out = haar_function(left, 4).cells - haar_function(right, 4).cells
        oracle += np.outer(out, haar_function(q, 4).cells) / 16
    oracle_norm = float(np.linalg.svd(oracle, compute_uv=False)[0])
    ok = abs(oracle_norm - SQ2) <= 1e-12 and np.allclose(oracle, assemble_matrix(dyadic_hilbert_spec(4), 4),
                                                         rtol=0, atol=1e-14)
    worst, worst_cross = 0.0, 0.0
    for depth in range(4, 11):
        w = StepFunction.constant(1.0, depth)
        spec = dyadic_hilbert_spec(depth)
        dense = weighted_operator_norm(spec, w, depth, "dense").value
        power = weighted_operator_norm(spec, w, depth, "power").value
        worst = max(worst, abs(dense - SQ2), abs(power - SQ2))
        worst_cross = max(worst_cross, abs(dense - power) / dense)
    ok = ok and worst <= 1e-8 and worst_cross <= 1e-6
    record("2", ok, f"oracle {oracle_norm!r}, max |norm - sqrt2| = {worst:.2e}, "
                    f"max dense/power rel diff = {worst_cross:.2e}")


# -- 3 ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def c03_functions():
    rng = np.random.default_rng(303)
    return [random_step_function(rng, 6) for _ in range(200)]


def _sandwich_violations(functions, lams):
    bad, first = 0, None
    for f in functions:
        for q in all_intervals(6):
            lo, hi = median_interval(f, q)
            for lam in lams:
                om = local_mean_oscillation(f, q, lam)
                for m in (lo, hi):
                    v = rearrangement_at(StepFunction(6, f.cells - m), q, lam * q.length)
                    if not (om - SLACK <= v <= 2 * om + SLACK):
                        bad += 1
                        if first is None:
                            first = f"lam={lam} Q={q.to_list()} m={m!r}: {v!r} vs omega {om!r}"
    return bad, first


def test_c03_sandwich_lambda_eighth_and_quarter(c03_functions):
    bad, first = _sandwich_violations(c03_functions, (0.125, 0.25))
    record("3.sandwich_1/8_1/4", bad == 0, f"{bad} violations" + (f", first {first}" if first else ""))


def test_c03_sandwich_lambda_half(c03_functions):
    bad, first = _sandwich_violations(c03_functions, (0.5,))
    record("3.sandwich_1/2", bad == 0, f"{bad} violations" + (f", first {first}" if first else ""))


def test_c03_transfers(c03_functions):
    bad = 0
    for f in c03_functions:
        for q in all_intervals(6):
            block = f.cells[q.cell_slice(6)]
            for lam in (0.125, 0.25, 0.5):
                v = rearrangement_at(f, q, lam * q.length)
                for p in (1.0, 2.0):
                    weak = lam ** (-1 / p) * weak_lp_norm(f, q, p)
                    strong = (lam * q.length) ** (-1 / p) * (np.sum(np.abs(block) ** p) * f.cell_width) ** (1 / p)
                    bad += (v > weak + SLACK) + (v > strong + SLACK)
    record("3.transfers", bad == 0, f"{bad} violations")


def test_c03_median_bound(c03_functions):
    bad, first = 0, None
    for f in c03_functions:
        for q in all_intervals(6):
            m = median(f, q)
            v = rearrangement_at(f, q, q.length / 2)
            if abs(m) > v + SLACK:
                bad += 1
                first = first or f"Q={q.to_list()} m={m!r} > {v!r}"
    record("3.median_bound", bad == 0, f"{bad} violations" + (f", first {first}" if first else ""))


# -- 4 ---------------------------------------------------------------------------

def test_c04_lerner_end_to_end():
    start = time.perf_counter()
    rng = np.random.default_rng(404)
    functions = [random_step_function(rng, 8) for _ in range(100)]
    functions.append(StepFunction(8, np.r_[256.0, np.zeros(255)]))
    functions.append(StepFunction(3, [16.0] + [0.0] * 7))
    failures, worst = [], 0.0
    for i, f in enumerate(functions):
        rep = verify_decomposition(f, decompose(f, ROOT), 0.25, 0.125, 4.0, 4.0)
        worst = max(worst, rep.least_constant)
        failures += [(i, r.name, r.cell) for r in rep.failures()]
    spike = decompose(functions[-1], ROOT).generations == ((DyadicInterval(3, 0),),)
    elapsed = time.perf_counter() - start
    record("4", not failures and spike and elapsed < 60,
           f"{len(functions)} functions, {len(failures)} property failures, spike cubes ok={spike}, "
           f"largest needed constant {worst:.3f}, {elapsed:.1f} s")


# -- 5 ---------------------------------------------------------------------------

def test_c05_far_part_constancy():
    rng = np.random.default_rng(505)
    worst = 0.0
    for tau in (0, 1, 2):
        for s in range(50):
            spec = random_spec(tau, 8, seed=1000 * tau + s)
            for _ in range(50):
                f = random_step_function(rng, 8)
                _, spreads = far_part_spreads(spec, f, max_level=6)
                worst = max(worst, float(spreads.max()))
    record("5", worst <= 1e-12, f"7500 (spec, f) pairs, max spread {worst:.2e}")


# -- 6 ---------------------------------------------------------------------------

def _c_emp(tau, depth, n_specs=20, n_funcs=20):
    rng = np.random.default_rng(606)
    profiles = [Profile.random(rng) for _ in range(n_funcs)]
    worst = 0.0
    for s in range(n_specs):
        spec = random_spec(tau, depth, seed=600 + s)
        for p in profiles:
            r = shift_oscillation_ratios(spec, p.cells(depth), 0.125)
            worst = max(worst, float(np.nanmax(r)))
    return worst


def test_c06_oscillation_constant():
    parts, ok = [], True
    for tau in (0, 1, 2):
        c6, c10 = _c_emp(tau, 6), _c_emp(tau, 10)
        good = math.isfinite(c6) and math.isfinite(c10) and c10 <= 2 * c6 and c6 <= 2 * c10
        ok &= good
        parts.append(f"tau={tau}: {c6:.3f} (D=6) vs {c10:.3f} (D=10)")
    record("6", ok, ", ".join(parts))


# -- 7 ---------------------------------------------------------------------------

def test_c07_domination():
    rng = np.random.default_rng(707)
    profiles = [Profile.random(rng) for _ in range(50)]
    consts, degenerate = {}, 0
    for depth in (6, 10):
        spec = dyadic_hilbert_spec(depth)
        vals = []
        for p in profiles:
            try:
                vals.append(shift_domination(p.cells(depth), spec, ROOT).empirical_constant)
            except DegenerateDomination:
                degenerate += 1
        consts[depth] = max(vals) if vals else math.inf
    c6, c10 = consts[6], consts[10]
    ok = degenerate == 0 and math.isfinite(c6) and math.isfinite(c10) and c10 <= 2 * c6 and c6 <= 2 * c10
    record("7", ok, f"C = {c6:.3f} (D=6) vs {c10:.3f} (D=10), {degenerate} degenerate")


# -- 8 ---------------------------------------------------------------------------

def test_c08_weighted_maximal():
    rng = np.random.default_rng(808)
    worst = 0.0
    for _ in range(500):
        sigma = random_weight(rng, 8)
        f = random_step_function(rng, 8)
        if not np.any(f.cells):
            f = StepFunction(8, np.ones(256))
        m = weighted_dyadic_maximal(f, sigma)
        worst = max(worst, weighted_lp_norm(m.cells, sigma.cells) / weighted_lp_norm(f.cells, sigma.cells))
    record("8", worst <= 2 + 1e-9, f"500 pairs, max ratio {worst:.4f}")


# -- 9, 10 -----------------------------------------------------------------------

@pytest.fixture(scope="module")
def default_sweep():
    start = time.perf_counter()
    res = run_sweep()
    return res, time.perf_counter() - start


def test_c09_main_sweep(default_sweep):
    res, elapsed = default_sweep
    rows = [r for r in res.rows if r.error is None]
    ok = (elapsed < 300 and len(rows) == len(res.rows) and res.max_ratio <= 8
          and res.slope is not None and 0.5 <= res.slope <= 1.05)
    a2 = ", ".join(f"{r.a2_constant:.3f}" for r in rows)
    record("9", ok, f"{elapsed:.1f} s, max ratio {res.max_ratio:.3f}, slope {res.slope:.3f}, a2 = [{a2}]")


def test_c10_buckley(default_sweep):
    res, _ = default_sweep
    record("10", res.max_maximal_ratio <= 10, f"max maximal_lb / a2 = {res.max_maximal_ratio:.3f}")


# -- 11 --------------------------------------------------------------------------

def test_c11_petermichl():
    intervals = ((0.25, 0.5), (0.3, 0.7), (0.125, 0.625))
    fine = [hilbert_compare(a, b, 256, 8, 8) for a, b in intervals]
    coarse = [hilbert_compare(a, b, 4, 1, 8) for a, b in intervals]
    scales = np.array([c.scale for c in fine])
    spread = float((scales.max() - scales.min()) / np.abs(scales).mean())
    better = all(f.rel_error < c.rel_error for f, c in zip(fine, coarse))
    errs = ", ".join(f"{f.rel_error:.3f}<{c.rel_error:.3f}" for f, c in zip(fine, coarse))
    record("11", spread <= 0.05 and better,
           f"scales {np.round(scales, 4).tolist()}, spread {spread:.2%}, errors {errs}")


# -- 12 --------------------------------------------------------------------------

def test_c12_determinism():
    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, DYADIC_SHARP_THREADS=threads)
        proc = subprocess.run([sys.executable, "-m", "dyadic_sharp", "--seed", "7", "sweep"],
                              capture_output=True, env=env, timeout=600)
        assert proc.returncode == 0, proc.stderr
        outs.append(proc.stdout)
    record("12", outs[0] == outs[1] and len(outs[0]) > 0,
           f"{len(outs[0])} CSV bytes, identical={outs[0] == outs[1]}")
