"""Acceptance battery: one test per criterion at the stated sample sizes and tolerances.

Each test prints a single ``criterion k: PASS|FAIL`` line with its key numbers
and runtime, then asserts the criterion.
"""

import json
import math
import time

import pytest

from bochner.branch import BranchKind
from bochner.cli import ACCEPTANCE_MEASURES, main
from bochner.sheet import HalfLineMeasure
from bochner.spectral import BoundaryVariant
from bochner.verify import (
    check_eq3,
    check_extinction,
    check_laplace,
    check_martingale,
    check_rayknight,
    check_semigroup,
    check_sheet_consistency,
    check_spectral,
    check_subordinator,
)

from conftest import LN2

SEED = 12345
N = 1_000_000
H = BranchKind.HOMOGRAPHIC

pytestmark = pytest.mark.slow


@pytest.fixture
def announce(capsys):
    def _say(k, ok, detail, runtime, budget):
        ok = bool(ok) and runtime < budget
        with capsys.disabled():
            print(f"\ncriterion {k}: {'PASS' if ok else 'FAIL'}  {detail}  [{runtime:.2f}s < {budget:g}s]")
        return ok

    return _say


def _maxz(reports):
    return max(abs(z) for r in reports for z in r.z)


def _summary(reports):
    return "; ".join(r.summary() for r in reports if not r.passed) or f"max|z|={_maxz(reports):.2f}"


def test_criterion_1_semigroup(announce):
    rep = check_semigroup()
    errs = ", ".join(f"{g.label}={g.value:.1e}" for g in rep.gates)
    assert announce(1, rep.passed, errs, rep.runtime, 1.0), rep.summary()


def test_criterion_2_subordinator(announce):
    t0 = time.perf_counter()
    reps = [check_subordinator(b, a, t, [0.5, 1.0, 2.0], N, seed=SEED)
            for b in BranchKind for a in (LN2, 1.5) for t in (0.5, 2.0)]
    ok = all(r.passed for r in reps) and len(reps) * 3 == 24
    detail = f"{3 * len(reps)} Laplace cells + {len(reps)} zero atoms, {_summary(reps)}"
    assert announce(2, ok, detail, time.perf_counter() - t0, 60), _summary(reps)


def test_criterion_3_sheet(announce):
    t0 = time.perf_counter()
    reps = [check_sheet_consistency(b, n=100_000, seed=SEED) for b in BranchKind]
    pmin = min(g.value for r in reps for g in r.gates)
    ok = all(r.passed for r in reps)
    assert announce(3, ok, f"min KS p={pmin:.3g} (gate 0.01)", time.perf_counter() - t0, 60), _summary(reps)


def test_criterion_4_spectral(announce):
    rep = check_spectral()
    errs = ", ".join(f"{g.label}={g.value:.1e}" for g in rep.gates)
    assert announce(4, rep.passed, errs, rep.runtime, 5.0), rep.summary()


def test_criterion_5_laplace(announce):
    t0 = time.perf_counter()
    reps = [check_laplace(b, mu, [0.5, 1.0, 2.0], 1.0, N, BoundaryVariant.PLAIN, seed=SEED)
            for b in BranchKind for mu in ACCEPTANCE_MEASURES]
    ext = [check_laplace(H, mu, [0.0, 0.5, 1.0, 2.0], 1.0, N, BoundaryVariant.EXTINCTION, seed=SEED)
           for mu in ACCEPTANCE_MEASURES]
    # the lambda = 0 extinction target is the extinction probability e^{-t}
    lam0 = all(r.analytic[0] == pytest.approx(math.exp(-1.0), rel=1e-12) for r in ext)
    ok = all(r.passed for r in reps + ext) and lam0
    assert announce(5, ok, f"plain+extinction {_summary(reps + ext)}", time.perf_counter() - t0, 180), \
        _summary(reps + ext)


def test_criterion_6_eq3(announce):
    rep = check_eq3(H, HalfLineMeasure.dirac(LN2, 2.0), [0.05, 0.2], 1.0, N, seed=SEED)
    ok = rep.passed and rep.analytic[0] == pytest.approx(-4 / 3, abs=1e-12)
    assert announce(6, ok, f"I(eps)={[round(e.mean, 4) for e in rep.estimates[:2]]}, max|z|={_maxz([rep]):.2f}",
                    rep.runtime, 120), rep.summary()


def test_criterion_7_martingale(announce):
    mu = HalfLineMeasure.dirac(0.5)
    reps = [check_martingale(H, mu, 1.0, [0.25, 0.5, 1.0], 1.0, N, compensator=c, seed=SEED,
                             require_separation=True) for c in ("xi_at_zero", "xi_at_a")]
    sep = min(r.params["separation_last"] for r in reps)
    ok = all(r.passed for r in reps) and sep >= 6
    runtime = sum(r.runtime for r in reps)
    assert announce(7, ok, f"max|z|={_maxz(reps):.2f}, separation {sep:.0f} sigma", runtime, 120), _summary(reps)


def test_criterion_8_extinction(announce):
    rep = check_extinction(H, 1.0, 8.0, N, seed=SEED)
    ok = rep.passed and rep.analytic[0] == pytest.approx(math.exp(-1.000335), rel=1e-6)
    assert announce(8, ok, f"P(Z_8=0)={rep.estimates[0].mean:.5f} vs {rep.analytic[0]:.5f}, z={rep.z[0]:.2f}",
                    rep.runtime, 30), rep.summary()


def test_criterion_9_rayknight(announce):
    rep = check_rayknight(1.0, 0.3, 1e-3, 10_000, seed=SEED)
    p = rep.gates[0].value
    assert announce(9, rep.passed, f"KS p={p:.3g} (gate 0.005), mean z={rep.z[0]:.2f}", rep.runtime, 300), \
        rep.summary()


def test_criterion_10_reproducibility(announce, tmp_path):
    t0 = time.perf_counter()
    outs = [tmp_path / k for k in ("first", "second", "parallel")]
    codes = [main(["verify-all", "--seed", str(SEED), "--out", str(outs[0]), "--quiet"]),
             main(["verify-all", "--seed", str(SEED), "--out", str(outs[1]), "--quiet"]),
             main(["verify-all", "--seed", str(SEED), "--out", str(outs[2]), "--parallel", "4", "--quiet"])]
    records = [(o / "results.json").read_bytes() for o in outs]
    same = records[0] == records[1] == records[2]
    runtime = max(json.loads((o / "run.json").read_text())["total_runtime"] for o in outs)
    ok = same and codes == [0, 0, 0]
    assert announce(10, ok, f"exit codes {codes}, records identical={same}, slowest verify-all {runtime:.1f}s",
                    time.perf_counter() - t0, 600), codes
