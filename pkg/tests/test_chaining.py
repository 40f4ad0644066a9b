import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lotail.chaining import (
    PUBLISHED_CONSTANT,
    build_net,
    closure_level,
    encode_count,
    f_minimizer,
    family_bound,
    family_bound_detail,
    increment_sq,
    kwa_bound,
    nearest_multiple,
    optimize_plan,
    paper_plan,
    plan_from_free,
    plan_to_json,
    total_constant,
)
from lotail.errors import NonNestedCounts, ParamOutOfRange, ZeroVariance
from lotail.family import constant_family, gen_family, make_family, make_step
from lotail.oracle import enumerate_exact, weights_distribution


def test_kwa_examples():
    assert kwa_bound(1, 2) == pytest.approx(1 / 8, rel=1e-14)
    assert kwa_bound(2, 2) == pytest.approx(1 / 16, rel=1e-14)
    vals = [kwa_bound(1.5, p) for p in range(2, 60)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("C, p", [(0.5, 2), (1, 1.5)])
def test_kwa_domain(C, p):
    with pytest.raises(ParamOutOfRange):
        kwa_bound(C, p)


def test_f_minimizer_examples():
    assert f_minimizer(1, 1) == pytest.approx(3 ** (1 / 3) * 2 ** (4 / 3) * 4, rel=1e-12)
    assert f_minimizer(1, 1) == pytest.approx(14.54, abs=0.01)
    assert f_minimizer(2, 15) == pytest.approx(234.5, abs=0.1)
    assert f_minimizer(3, 2) / f_minimizer(3, 1) == pytest.approx(2 ** (1 / 3), rel=1e-12)


def test_nearest_multiple_rules():
    assert nearest_multiple(15, math.log(234.455)) == 240
    assert nearest_multiple(10, math.log(15.0)) == 20  # tie goes up
    assert nearest_multiple(10, math.log(2.0)) == 10  # clamp
    big = nearest_multiple(3, 200 * math.log(2))
    assert big % 3 == 0 and abs(math.log(big) - 200 * math.log(2)) < 1e-12


def test_paper_plan_head():
    plan = paper_plan(12)
    assert [lv.N for lv in plan.levels[:2]] == [15, 240]
    assert (plan.levels[0].C, plan.levels[1].C, plan.levels[0].p, plan.levels[1].p) == (1, 2, 2, 4)
    counts = plan.counts()
    assert all(b % a == 0 for a, b in zip(counts, counts[1:]))


def test_level_terms():
    tot = total_constant(paper_plan(12))
    assert tot.terms[0] == pytest.approx(2.875, rel=1e-14)
    expected = 2 * math.sqrt(3 / 15) * (1 + 0.5 * 240 * (1 / 3) * (3 / 8) ** 4)
    assert tot.terms[1] == pytest.approx(expected, rel=1e-13)
    assert tot.terms[1] == pytest.approx(1.602, abs=1e-3)


def test_tail_and_total():
    tot = total_constant(paper_plan(12))
    assert 0 < tot.tail_bound < 1e-9
    assert math.isfinite(tot.total)
    assert tot.paper_claim_met == (tot.total <= PUBLISHED_CONSTANT)


@pytest.mark.parametrize("K", range(1, 14))
def test_telescoping(K):
    a, b = total_constant(paper_plan(K)), total_constant(paper_plan(K + 1))
    assert abs(b.total - a.total) <= a.tail_bound * (1 + 1e-12) + 1e-15


def test_total_monotone_in_correction():
    # doubling the last count raises its correction term and lowers the next lead term;
    # with the next levels fixed through the template, the level term itself must grow
    base = total_constant(plan_from_free(3, [1.0, 2.0], [2.0, 4.0], [15, 16]))
    more = total_constant(plan_from_free(3, [1.0, 2.0], [2.0, 4.0], [15, 32]))
    assert more.terms[1] > base.terms[1]


def test_huge_counts_are_encoded():
    plan = paper_plan(12)
    big = plan.levels[-1].N
    assert big > 2**63
    enc = encode_count(big)
    assert enc["exponent"] > 63
    assert math.log2(enc["mantissa"]) + enc["exponent"] == pytest.approx(math.log2(big), abs=1e-9)
    js = plan_to_json(plan)
    assert js["published_constant"] == 4.45 and js["paper_claim_met"] is False


def test_optimize_budget_zero():
    assert optimize_plan(12, 0, 0) == paper_plan(12)


def test_optimize_improves_and_is_deterministic():
    a = optimize_plan(12, 600, 3)
    b = optimize_plan(12, 600, 3)
    assert a == b
    assert total_constant(a).total <= total_constant(paper_plan(12)).total


def test_level_one_rebalancing():
    base = total_constant(paper_plan(12))
    x = (8 * math.sqrt(3)) ** (2 / 3)  # minimizer of x/8 + 2 sqrt(3/x)
    N1 = round(x)
    tweaked = total_constant(plan_from_free(12, [1.0], [2.0], [N1]))
    assert tweaked.terms[0] < base.terms[0]
    assert tweaked.total < base.total


def test_build_net_example():
    fam = gen_family("indicator", 4, 0, {"weights": [0.5] * 4, "jumps": [0.2, 0.4, 0.6, 0.8]})
    lvl = build_net(fam, [1, 4]).levels[1]
    assert lvl.points() == pytest.approx([0, 0.2, 0.4, 0.6])
    assert build_net(fam, [1]).levels[0].points() == [0.0]


def test_build_net_errors():
    with pytest.raises(ZeroVariance):
        build_net(constant_family([0.0]), [1])
    with pytest.raises(NonNestedCounts):
        build_net(gen_family("random", 3, 0), [1, 4, 6])


def _projection(level, t):
    return max(u for u in level.times if u <= t)


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(["random", "indicator", "szatzschneider"]), n=st.integers(3, 9), seed=st.integers(0, 2**32))
def test_net_inequalities(kind, n, seed):
    fam = gen_family(kind, n, seed)
    Ns = [1, 3, 12, 48, 480]
    net = build_net(fam, Ns)
    V = dict(zip(fam.times, fam.variance_exact))
    V1 = fam.variance_exact[-1]
    for level in net.levels:
        # l / N_k <= V(u_l) / V(1) for every index l
        for t, first in zip(level.times, level.first_index):
            assert V[t] * level.N >= first * V1
    for prev, level in zip(net.levels, net.levels[1:]):
        idx = {t: j for j, t in enumerate(fam.times)}
        for t in level.times:
            s = _projection(prev, t)
            inc = increment_sq(fam, idx[t], idx[s])
            assert inc <= V[t] - V[s] <= V1 / prev.N


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("p", [2, 4, 8])
def test_moment_bound_consistency(seed, p):
    t = gen_family("random", 9, seed).terminal
    dy = weights_distribution(t)
    norm_p = float(dy.central_abs_moment(p)) ** (1 / p)
    vals = np.abs(dy.real_values()) / norm_p
    for C in (1.0, 1.5, 2.0, 3.0):
        lhs = float(np.sum(np.maximum(vals - C, 0) * dy.counts) / dy.total)
        assert lhs <= 2 * kwa_bound(C, p) + 1e-15


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32))
def test_hypercontractive_step(n, seed):
    t = gen_family("random", n, seed).terminal
    dy = weights_distribution(t)
    nsq = sum((Fraction(float(x)) ** 2 for x in t), Fraction(0))
    for p in (2, 4, 8):
        # ||X||_p <= sqrt(p-1) ||t||  <=>  E|X|^p <= (p-1)^(p/2) ||t||^p
        assert dy.central_abs_moment(p) ** 2 <= (p - 1) ** p * nsq**p


def test_family_bound_examples(two_step):
    assert family_bound(two_step) >= 0.5
    assert family_bound(constant_family([1.0])) >= 0
    with pytest.raises(ZeroVariance):
        family_bound(constant_family([0.0, 0.0]))


@pytest.mark.parametrize("seed", range(10))
def test_family_bound_sandwich(seed):
    fam = gen_family("random", 3 + seed % 8, seed)
    ex = float(enumerate_exact(fam).EX)
    fb = family_bound_detail(fam)
    assert ex <= fb.bound <= total_constant(paper_plan(12)).total * fam.terminal_norm * (1 + 1e-12)


def test_closure_level():
    fam = make_family([make_step([(0, 0), (0.5, 1)])])
    # V jumps 0 -> 1, so a single level with N >= 2 closes the chain
    assert closure_level(fam, [1, 2, 4]) == 1
    assert closure_level(constant_family([1.0]), [1, 3]) == 0
