"""Acceptance criteria, one test each.

Run under pytest, or directly with ``python tests/test_acceptance.py`` to get
one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from lotail.chaining import family_bound, optimize_plan, paper_plan, total_constant
from lotail.family import admissibility_check, gen_family
from lotail.inequalities import PHI_SET, SuiteReport, derive_constants, weight_checks
from lotail.montecarlo import estimate_tails
from lotail.oracle import BoxSpec, family_distributions

RESULTS: dict[int, tuple[bool, str]] = {}


def _record(k: int, ok: bool, detail: str) -> tuple[bool, str]:
    RESULTS[k] = (ok, detail)
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok, detail


def criterion_1():
    start = time.perf_counter()
    sza = derive_constants("sza8_53", 4.45)
    bt = derive_constants("bt_16", 4.45)
    six = derive_constants("six_430", 4.45)
    elapsed = time.perf_counter() - start
    ok = (
        sza.multiplier == 8.0
        and 52.5 <= sza.tail_constant <= 53.0
        and abs(bt.multiplier - 14.6) <= 0.05
        and six.tail_constant <= 435
        and elapsed < 1.0
    )
    detail = (
        f"8/53 row: multiplier {sza.multiplier!r}, constant {sza.tail_constant:.4f}; "
        f"bt_16 multiplier {bt.multiplier:.4f}; six_430 constant {six.tail_constant:.2f}; {elapsed:.3f}s"
    )
    return _record(1, ok, detail)


def criterion_2():
    start = time.perf_counter()
    base = paper_plan(12)
    base_total = total_constant(base)
    opt = optimize_plan(12, 10_000, 0)
    opt_total = total_constant(opt)
    elapsed = time.perf_counter() - start
    Ns = [lv.N for lv in base.levels[:2]]
    ok = Ns == [15, 240] and base_total.tail_bound < 1e-9 and opt_total.total <= base_total.total and elapsed < 30
    detail = (
        f"N1,N2={Ns}; template total {base_total.total:.6f} (tail {base_total.tail_bound:.2e}, "
        f"<= 4.45: {base_total.paper_claim_met}); optimized total {opt_total.total:.6f} "
        f"(<= 4.45: {opt_total.paper_claim_met}); {elapsed:.1f}s"
    )
    return _record(2, ok, detail)


def criterion_3():
    start = time.perf_counter()
    suite = SuiteReport()
    ids = set()
    for i in range(1000):
        n = 2 + i % 13
        t = gen_family("random", n, i).terminal
        top = float(t.sum())
        suite.extend(weight_checks(t, [top * j / 5 for j in range(1, 5)], mode="exact"))
        suite.attempt("proposition", fam=gen_family("ordered_alpha", n, i), mode="exact")
    for r in suite.results:
        ids.add(r.check_id)
    elapsed = time.perf_counter() - start
    failures = suite.failures()
    needed = {"hyp", "szarek", "pz", "kahane", "conc_phi", "subgauss", "classic_lo", "proposition"}
    theorem = sum(r.kind == "theorem" for r in suite.results)
    ok = not failures and needed <= ids and elapsed < 180
    detail = f"{theorem} theorem checks over 1000 inputs, {len(failures)} failures, {elapsed:.1f}s"
    return _record(3, ok, detail)


def criterion_4():
    bad = checked = 0
    for i in range(500):
        n = 5 + i % 10
        fam = gen_family("szatzschneider", n, 10_000 + i)
        assert admissibility_check(fam).admissible
        dx, dy = family_distributions(fam, "exact")
        top = Fraction(float(fam.terminal.sum()))
        for j in range(1, 11):
            u = top * j / 10
            checked += 1
            if not dx.prob_ge(8 * u) <= 53 * dy.prob_ge(u):
                bad += 1
    return _record(4, bad == 0, f"{checked} (family, u) pairs, {bad} violations of P(X>=8u) <= 53 P(Y>=u)")


def criterion_5():
    bad = 0
    worst = Fraction(0)
    for i in range(500):
        n = 3 + i % 2
        fam = gen_family("szatzschneider", n, 20_000 + i)
        assert admissibility_check(fam).admissible
        dx, dy = family_distributions(fam, "exact")
        lhs, py = dx.prob_ge(1), dy.prob_ge(1)
        if not lhs <= 2 * py:
            bad += 1
        if py > 0:
            worst = max(worst, lhs / py)
    return _record(5, bad == 0, f"500 families, {bad} violations, largest ratio {float(worst):.4f}")


def criterion_6():
    low = high = 0
    cap = total_constant(paper_plan(12)).total
    kinds = ("random", "indicator", "ordered_alpha", "szatzschneider")
    for i in range(200):
        kind = kinds[i % 4]
        n = 3 + i % 10
        fam = gen_family(kind, n, 30_000 + i)
        if fam.variance_exact[-1] == 0:
            continue
        ex = float(family_distributions(fam, "exact")[0].mean())
        b = family_bound(fam)
        low += b < ex
        high += b > cap * fam.terminal_norm * (1 + 1e-12)
    return _record(6, low == 0 and high == 0, f"200 families, {low} bounds below EX, {high} above total*||a(1)||")


def _mc_pairs(count: int):
    pairs = []
    i = 0
    while len(pairs) < count:
        fam = gen_family("random", 3 + i % 12, 40_000 + i)
        dx, _ = family_distributions(fam, "exact")
        rng = np.random.default_rng(i)
        for u in rng.permutation(dx.real_values()):
            p = dx.prob_ge(float(u))
            if 0.05 <= p <= 0.95:
                pairs.append((fam, float(u), p))
                break
        i += 1
    return pairs


def criterion_7():
    covered = 0
    for k, (fam, u, p) in enumerate(_mc_pairs(100)):
        est = estimate_tails(fam, [u], 100_000, seed=50_000 + k).pX[0]
        covered += est.contains(float(p))
    return _record(7, covered >= 93, f"{covered}/100 Wilson intervals contain the exact tail")


def criterion_8(tmp_dir):
    commands = {
        "reproduce": ["reproduce", "--seed", "0"],
        "verify": ["verify", "--n", "5,8,11", "--seed", "7"],
        "search": ["search", "--n", "3,4,5", "--seed", "7", "--budget", "300"],
    }
    same = {}
    for name, argv in commands.items():
        blobs = []
        for rep in range(2):
            out = f"{tmp_dir}/{name}-{rep}.json"
            subprocess.run([sys.executable, "-m", "lotail", *argv, "--out", out], check=False)
            with open(out, "rb") as fh:
                blobs.append(fh.read())
        same[name] = blobs[0] == blobs[1] and len(blobs[0]) > 0
    return _record(8, all(same.values()), ", ".join(f"{k}: {'identical' if v else 'DIFFERENT'}" for k, v in same.items()))


def test_criterion_1_constant_table():
    assert criterion_1()[0]


def test_criterion_2_chaining_pipeline():
    assert criterion_2()[0]


def test_criterion_3_theorem_suites():
    assert criterion_3()[0]


def test_criterion_4_main_theorem():
    assert criterion_4()[0]


def test_criterion_5_original_conjecture_small_n():
    assert criterion_5()[0]


def test_criterion_6_chaining_bound_validity():
    assert criterion_6()[0]


def test_criterion_7_mc_coverage():
    assert criterion_7()[0]


def test_criterion_8_determinism(tmp_path):
    assert criterion_8(tmp_path)[0]


def main() -> int:
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        for fn in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7):
            fn()
        criterion_8(tmp)
    return 0 if all(ok for ok, _ in RESULTS.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
