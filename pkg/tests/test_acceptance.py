"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
written straight to the terminal even when output capture is on.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from almostosc.classifier import classify_almost_oscillatory
from almostosc.cli import verify_example
from almostosc.criteria import (
    CriterionParams,
    Verdict,
    check_lemma2,
    corollary_specialize,
    criterion1_series,
    criterion2_series,
    f_min,
    riccati_inequality_check,
    riccati_w,
)
from almostosc.equation import EquationSpec, InitialData, simulate, telescoping_defect
from almostosc.numerics import OddRatio
from conftest import longest_run, riccati_suite
from oracles import fmin_oracle

# frozen from tests/oracles/example1_oracle.py before the package existed
GOLDEN_S1_100 = 8.820895886442845
GOLDEN_S2_MINUS_50 = 1938.3807875734713
GOLDEN_S2_PLUS_50 = 1950.4384796645013

EXAMPLES = ("example1", "example2", "example3")
ODD_RATIOS = [OddRatio(n, d) for n, d in
              [(1, 1), (9, 7), (7, 5), (5, 3), (3, 1), (11, 3), (5, 1), (7, 1), (9, 5), (13, 5)]]


@pytest.fixture
def verdict(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}: {detail}")
        assert ok, detail

    return emit


def test_c1_example_residuals_exact(verdict):
    lines, ok = [], True
    for name in EXAMPLES:
        t0 = time.perf_counter()
        res = verify_example(name, 500)
        dt = time.perf_counter() - t0
        ok &= res.ok and dt < 5.0
        lines.append(f"{name} {'ok' if res.ok else res.message} in {dt:.2f}s")
    verdict("criterion 1 (exact residuals, n=500, < 5 s each)", ok, "; ".join(lines))


def test_c2_tags(verdict, examples):
    want = {"example1": "XOscillatoryEvidence", "example2": "DeltaXOscillatoryEvidence",
            "example3": "TendsToZeroEvidence"}
    got = {}
    for name, sf in examples.items():
        traj = simulate(sf.spec, sf.init, 400)
        got[name] = classify_almost_oscillatory(traj, (1, 400)).tag.value
    verdict("criterion 2 (tags on [1, 400])", got == want, ", ".join(f"{k}={v}" for k, v in got.items()))


def random_exponents(rng):
    while True:
        gamma, alpha = rng.choice(len(ODD_RATIOS), size=2)
        gamma, alpha = ODD_RATIOS[gamma], ODD_RATIOS[alpha]
        if alpha > gamma >= 1:
            return alpha, gamma


def test_c3_fmin_oracle(verdict):
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst = 0.0
    fails = 0
    for _ in range(200):
        alpha, gamma = random_exponents(rng)
        a, b = 10.0 ** rng.uniform(-2, 2, size=2)
        fm = f_min(a, b, alpha, gamma)
        oracle = fmin_oracle.golden_minimum(a, b, alpha.value(), gamma.value())
        err = abs(fm - oracle) / (1 + fm)
        worst = max(worst, err)
        fails += err > 1e-4
    dt = time.perf_counter() - t0
    verdict("criterion 3 (closed-form minimum vs golden section, 200 cases, < 10 s)",
            fails == 0 and dt < 10.0, f"max |f_min - oracle|/(1+f_min) = {worst:.2e}, {fails} misses, {dt:.2f}s")


def test_c4_power_difference_property(verdict):
    rng = np.random.default_rng(11)
    bad = []
    for i in range(10_000):
        gamma = ODD_RATIOS[rng.integers(len(ODD_RATIOS))]
        if i % 2 and gamma.is_integer:
            # exact rationals
            y = Fraction(int(rng.integers(0, 10**4)), int(rng.integers(1, 100)))
            x = y + Fraction(int(rng.integers(0, 10**4)), int(rng.integers(1, 100)))
        else:
            y = float(10.0 ** rng.uniform(-3, 3)) * float(rng.random() < 0.95)
            x = y + float(10.0 ** rng.uniform(-3, 3)) * float(rng.random() < 0.95)
        if not check_lemma2(x, y, gamma):
            bad.append((x, y, str(gamma)))
    verdict("criterion 4 (power difference inequality, 10^4 cases)", not bad,
            f"{len(bad)} counterexamples" + (f", first {bad[0]}" if bad else ""))


def test_c5_riccati_suite(verdict):
    cases, tries = riccati_suite()
    runs = [longest_run(chk.applicable) for *_, chk in cases]
    violations = sum(len(chk.violations) for *_, chk in cases)
    caught = 0
    for spec, traj, params, chk in cases:
        n = chk.applicable[len(chk.applicable) // 2]
        w = {n + 1: riccati_w(spec, traj, params.p, n + 1) + 1}
        caught += len(riccati_inequality_check(spec, traj, params, [n], w=w).violations)
    ok = len(cases) >= 50 and min(runs) >= 20 and violations == 0 and caught >= 1
    verdict("criterion 5 (Riccati inequality, tol 1e-9)", ok,
            f"{len(cases)} instances from {tries} draws, shortest run {min(runs)}, "
            f"{violations} violations; perturbed self-test caught {caught}/{len(cases)}")


def telescoping_corpus(examples):
    corpus = [(sf.spec, simulate(sf.spec, sf.init, 500)) for sf in examples.values()]
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = int(rng.integers(0, 3))
        spec = EquationSpec(f"{rng.integers(1, 5)} + 1/n", f"{rng.integers(1, 4)}/{rng.integers(1, 4)}",
                            f"1/(n+{rng.integers(0, 3)})", f"{rng.integers(0, 4)}/{rng.integers(1, 4)}",
                            k, "1", str(rng.choice(["3", "5"])))
        init = InitialData(1, [Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(k + 2)])
        corpus.append((spec, simulate(spec, init, 8)))
    return corpus


def test_c6_telescoping(verdict, examples):
    corpus = telescoping_corpus(examples)
    nonzero = 0
    checked = 0
    for spec, traj in corpus:
        start, stop = traj.interior.start, traj.horizon
        # consecutive steps plus the full span; any pair is a sum of steps
        pairs = [(n, n + 1) for n in range(start, stop)] + [(start, stop)]
        for n2, n in pairs:
            checked += 1
            nonzero += telescoping_defect(spec, traj, n2, n) != 0
    verdict("criterion 6 (telescoping identity, exact)", nonzero == 0,
            f"{len(corpus)} trajectories, {checked} spans, {nonzero} nonzero defects")


def test_c7_specialization(verdict, examples):
    results = {}
    # Q** is rational for the first spec, so both sides must match exactly
    results["rational-Q**"] = corollary_specialize(EquationSpec("1", "n^3", "2", 0, 0, "1", "3"), window=(1, 100))
    for name, sf in examples.items():
        results[name] = corollary_specialize(sf.spec, sf.params, window=(1, 100))
    ok = all(r.ok and r.q_star_exact for r in results.values()) and results["rational-Q**"].q_dstar_exact
    detail = ", ".join(
        f"{k}: Q* exact={r.q_star_exact}, Q** exact={r.q_dstar_exact} (max rel gap {r.q_dstar_max_rel_gap:.1e})"
        for k, r in results.items())
    verdict("criterion 7 (specialization c=0, gamma=1, n=1..100)", ok, detail)


def test_c8_example1_criteria(verdict, ex1):
    t0 = time.perf_counter()
    params = CriterionParams(p="1", d=1, M=1)
    s1 = criterion1_series(ex1.spec, params, 1000)
    plus = criterion2_series(ex1.spec, params, "plus", 1000)
    minus = criterion2_series(ex1.spec, params, "minus", 1000)
    dt = time.perf_counter() - t0
    verdicts = [s1.verdict, plus.verdict, minus.verdict]
    gold = [
        (s1.value_at(100), GOLDEN_S1_100),
        (minus.value_at(50), GOLDEN_S2_MINUS_50),
        (plus.value_at(50), GOLDEN_S2_PLUS_50),
    ]
    rel = max(abs(got - want) / abs(want) for got, want in gold)
    ok = all(v is Verdict.DIVERGENT for v in verdicts) and rel <= 1e-9 and dt < 5.0
    verdict("criterion 8 (Example 1 sums, N=1000, < 5 s)", ok,
            f"verdicts {[v.value for v in verdicts]}, S1(100)={s1.value_at(100):.12g}, "
            f"S2-(50)={minus.value_at(50):.12g}, S2+(50)={plus.value_at(50):.12g}, "
            f"max rel err {rel:.1e}, {dt:.2f}s")
    assert math.isfinite(s1.last)
