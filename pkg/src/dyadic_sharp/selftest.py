"""Invariant suites run by ``dyadic-sharp selftest``.

Each check yields ``(name, ok, detail)``.  Sizes are chosen so the whole run
stays well under a minute.  Rearrangement checks use the forms of the
median estimates that hold for every step function (see
``rearrangement_checks``); the literal endpoint forms are exercised, and
known to fail on some inputs, in the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dyadic import ROOT, DyadicInterval, StepFunction, all_intervals, average, refine
from .haar import (adjoint_spec, apply_shift_cells, assemble_matrix, dyadic_hilbert_spec,
                   haar_function, random_spec)
from .lerner import LernerDecomposition, decompose, verify_decomposition
from .petermichl import petermichl_average
from .rearrangement import (best_center, local_mean_oscillation, median_interval,
                            rearrangement_at, rearrangement_left_limit)
from .samples import random_step_function, random_weight
from .weighted import (ap_constant, dyadic_maximal, weighted_dyadic_maximal, weighted_lp_norm,
                       weighted_operator_norm)

SLACK = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "ok", bool(self.ok))


def _tol(x):
    return SLACK * max(1.0, float(np.max(np.abs(x))))


def haar_checks(rng):
    d = 8
    n = 1 << d
    rows = [np.ones(n)] + [haar_function(q, d).cells for q in all_intervals(d - 1)]
    gram = np.array(rows) @ np.array(rows).T / n
    err = float(np.abs(gram - np.eye(n)).max())
    yield Check("haar.orthonormality", err <= 1e-10, f"max |G - I| = {err:.2e}")

    for depth in range(4, 9):
        v = float(np.linalg.norm(assemble_matrix(dyadic_hilbert_spec(depth), depth), 2))
        yield Check(f"haar.hilbert_norm_d{depth}", abs(v - math.sqrt(2)) <= 1e-8, f"{v!r}")

    worst_lin = worst_adj = worst_mat = worst_trunc = 0.0
    for tau in (0, 1, 2):
        spec = random_spec(tau, 6, seed=int(rng.integers(1 << 30)))
        spec.check_admissible()
        mat = assemble_matrix(spec, 6)
        adj = adjoint_spec(spec)
        for _ in range(10):
            f, g = rng.standard_normal((2, 64))
            a, b = rng.standard_normal(2)
            hf, hg = apply_shift_cells(spec, f), apply_shift_cells(spec, g)
            lin = apply_shift_cells(spec, a * f + b * g) - (a * hf + b * hg)
            worst_lin = max(worst_lin, float(np.abs(lin).max()))
            worst_adj = max(worst_adj, abs(hf @ g - f @ apply_shift_cells(adj, g)) / 64)
            worst_mat = max(worst_mat, float(np.abs(mat @ f - hf).max()))
            # one level finer: the depth-6 terms act identically on refined input
            fine = apply_shift_cells(spec, refine(StepFunction(6, f), 7).cells)
            worst_trunc = max(worst_trunc, float(np.abs(fine - np.repeat(hf, 2)).max()))
    yield Check("haar.linearity", worst_lin <= 1e-12 * 10, f"{worst_lin:.2e}")
    yield Check("haar.adjoint_identity", worst_adj <= 1e-12, f"{worst_adj:.2e}")
    yield Check("haar.matrix_consistency", worst_mat <= 1e-12 * 10, f"{worst_mat:.2e}")
    yield Check("haar.truncation_consistency", worst_trunc <= 1e-12 * 10, f"{worst_trunc:.2e}")


def _brute_omega(block, h, lam, length):
    k = int(math.floor(lam * length / h + 1e-9))
    b = np.sort(block)
    cands = np.concatenate([b, (b[:, None] + b[None, :]).ravel() / 2])
    dev = np.sort(np.abs(b[None, :] - cands[:, None]), axis=1)[:, ::-1]
    vals = dev[:, k] if k < b.size else np.zeros(cands.size)
    return float(vals.min())


def rearrangement_checks(rng, n_functions: int = 20, depth: int = 5):
    """Sandwich for lambda < 1/2 at both median endpoints; at lambda = 1/2 for
    the endpoint nearest the best center; median bound via the left limit."""
    bad = {}
    for _ in range(n_functions):
        f = random_step_function(rng, depth)
        for q in all_intervals(depth):
            block = f.cells[q.cell_slice(depth)]
            tol = _tol(block)
            mi = median_interval(f, q)
            for lam in (0.125, 0.25, 0.5):
                om = local_mean_oscillation(f, q, lam)
                if abs(om - _brute_omega(block, f.cell_width, lam, q.length)) > tol:
                    bad.setdefault("rearrangement.omega_oracle", q)
                meds = (mi.low, mi.high) if lam < 0.5 else (mi.closest_to(best_center(f, q, lam)),)
                for m in meds:
                    g = StepFunction(depth, f.cells - m)
                    v = rearrangement_at(g, q, lam * q.length)
                    if not (om - tol <= v <= 2 * om + tol):
                        bad.setdefault(f"rearrangement.sandwich_lambda_{lam}", q)
            for m in (mi.low, mi.high):
                if abs(m) > rearrangement_left_limit(f, q, q.length / 2) + tol:
                    bad.setdefault("rearrangement.median_bound", q)
            for p in (1.0, 2.0):
                for lam in (0.125, 0.25, 0.5):
                    v = rearrangement_at(f, q, lam * q.length)
                    lp = (np.sum(np.abs(block) ** p) * f.cell_width) ** (1 / p)
                    if v > (lam * q.length) ** (-1 / p) * lp + tol:
                        bad.setdefault(f"rearrangement.strong_transfer_p{int(p)}", q)
    names = ["rearrangement.omega_oracle", "rearrangement.median_bound"] + [
        f"rearrangement.sandwich_lambda_{lam}" for lam in (0.125, 0.25, 0.5)] + [
        f"rearrangement.strong_transfer_p{p}" for p in (1, 2)]
    for name in names:
        q = bad.get(name)
        yield Check(name, q is None, "" if q is None else f"first failure on {q.to_list()}")


def lerner_checks(rng, n_functions: int = 20, depth: int = 8):
    failures = []
    for _ in range(n_functions):
        f = random_step_function(rng, depth)
        rep = verify_decomposition(f, decompose(f, ROOT))
        failures.extend(r.name for r in rep.failures())
    yield Check("lerner.random_suite", not failures, ", ".join(sorted(set(failures))))
    spike = StepFunction(3, [16.0] + [0.0] * 7)
    dec = decompose(spike, ROOT)
    yield Check("lerner.spike_example", dec.generations == ((DyadicInterval(3, 0),),)
                and verify_decomposition(spike, dec).ok, str(dec.to_json()))
    # the verifier must notice a cube removed from the middle of a chain
    f = tamper_base_function()
    dec = decompose(f, ROOT)
    rep = verify_decomposition(f, dec.without(1, 0))
    yield Check("lerner.tamper_detected", not rep.ok,
                ", ".join(r.name for r in rep.failures()))


def tamper_base_function(depth: int = 8) -> StepFunction:
    """Slow logarithmic ladder; its decomposition is a single nested chain."""
    n = 1 << depth
    cells = np.zeros(n)
    for j in range(depth):
        cells[n >> (j + 1): n >> j] = 0.1 * j
    cells[0] = 0.1 * depth
    return StepFunction(depth, cells)


def tampered_fixture() -> dict:
    f = tamper_base_function()
    dec = decompose(f, ROOT).without(1, 0)
    return {"function": f.to_json(), "decomposition": dec.to_json()}


def fixture_checks(fixture: dict):
    f = StepFunction.from_json(fixture["function"])
    dec = LernerDecomposition.from_json(fixture["decomposition"], f.depth)
    rep = verify_decomposition(f, dec)
    for r in rep.results:
        yield Check(f"fixture.lerner.{r.name}", r.ok,
                    r.detail or ("" if r.cell is None else f"cell {r.cell}"))


def weighted_checks(rng):
    w = StepFunction(1, [1.0, 4.0])
    rep = ap_constant(w)
    yield Check("weighted.ap_example", rep.constant == 1.5625 and rep.witness == ROOT,
                f"{rep.constant!r}")
    ok = True
    for _ in range(20):
        w = random_weight(rng, 6)
        rep = ap_constant(w)
        ok &= rep.constant >= 1 - SLACK
        ok &= rep.constant == average(w, rep.witness) * average(
            StepFunction(6, 1.0 / w.cells), rep.witness)
    yield Check("weighted.ap_witness", bool(ok))
    yield Check("weighted.maximal_example",
                np.array_equal(dyadic_maximal(StepFunction(2, [4, 0, 0, 0])).cells, [4, 2, 1, 1]))
    worst = 0.0
    for _ in range(100):
        s = random_weight(rng, 8)
        f = random_step_function(rng, 8)
        m = weighted_dyadic_maximal(f, s)
        worst = max(worst, float(weighted_lp_norm(m.cells, s.cells) / weighted_lp_norm(f.cells, s.cells)))
    yield Check("weighted.sigma_maximal_bound", worst <= 2 + 1e-9, f"max ratio {worst:.6f}")
    spec = dyadic_hilbert_spec(6)
    w = random_weight(rng, 6)
    a = weighted_operator_norm(spec, w, method="dense").value
    b = weighted_operator_norm(spec, w, method="power").value
    c = weighted_operator_norm(spec, StepFunction(6, 3.0 * w.cells), method="dense").value
    yield Check("weighted.norm_methods_agree", abs(a - b) <= 1e-6 * a, f"{a!r} vs {b!r}")
    yield Check("weighted.norm_scale_invariance", abs(a - c) <= 1e-12 * a, f"{a!r} vs {c!r}")


def kernel_checks(rng):
    worst = 0.0
    for backend in kernels.available_backends():
        x = rng.standard_normal(256)
        c = kernels.haar_forward(x, backend=backend)
        worst = max(worst, float(np.abs(kernels.haar_inverse(c, backend=backend) - x).max()))
    yield Check("kernels.roundtrip", worst <= 1e-12, f"backends {kernels.available_backends()}")


def petermichl_checks(rng):
    from .dyadic import unpad, zero_pad_embed
    from .haar import apply_shift
    f = random_step_function(rng, 6)
    a = petermichl_average(f, 1, 1, seed=0, padding=3)
    b = unpad(apply_shift(dyadic_hilbert_spec(9), zero_pad_embed(f, 3)), 3)
    err = float(np.abs(a.cells - b.cells).max())
    yield Check("petermichl.identity_grid", err <= 1e-12 * max(1, np.abs(f.cells).max()), f"{err:.2e}")


def sweep_checks(rng):
    from .sweep import run_sweep
    r1 = run_sweep([0.0, 0.5], depth=8, seed=3, cross_check_depth=None, workers=1, trials=8)
    r2 = run_sweep([0.0, 0.5], depth=8, seed=3, cross_check_depth=None, workers=2, trials=8)
    yield Check("sweep.deterministic_csv", r1.to_csv() == r2.to_csv())
    row = r1.rows[0]
    yield Check("sweep.unweighted_row", row.a2_constant == 1.0
                and abs(row.op_norm - math.sqrt(2)) <= 1e-8, f"{row.op_norm!r}")


SUITES = {
    "kernels": kernel_checks,
    "haar": haar_checks,
    "rearrangement": rearrangement_checks,
    "lerner": lerner_checks,
    "weighted": weighted_checks,
    "petermichl": petermichl_checks,
    "sweep": sweep_checks,
}


def run_selftest(seed: int = 0, fixture: dict | None = None) -> dict:
    """Run every suite; returns a JSON-ready summary with ``ok`` and per-check results."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    checks = []
    for name, suite in SUITES.items():
        try:
            checks.extend(suite(rng))
        except Exception as exc:  # a crashing suite is a failed suite
            checks.append(Check(f"{name}.crashed", False, f"{type(exc).__name__}: {exc}"))
    if fixture is not None:
        checks.extend(fixture_checks(fixture))
    failed = [c.name for c in checks if not c.ok]
    return {"ok": not failed, "failed": failed, "n_checks": len(checks),
            "runtime_s": round(time.perf_counter() - start, 3),
            "checks": [c.__dict__ for c in checks]}
