import numpy as np
import pytest

from lotail.errors import ZeroSamples
from lotail.family import constant_family, gen_family
from lotail.montecarlo import (
    estimate_tails,
    merge_distributions,
    sample_distributions,
    sample_signs,
    wilson_interval,
)
from lotail.oracle import enumerate_exact


def test_ci_covers_exact_half(two_step):
    rep = estimate_tails(two_step, [1], 100_000, seed=1)
    assert rep.pX[0].contains(0.5)
    assert rep.pY[0].contains(0.25)
    assert abs(rep.EX - 0.5) < 5 * rep.EX_stderr


def test_same_seed_identical(two_step):
    a = estimate_tails(two_step, [0.5, 1], 5000, seed=3).to_json()
    b = estimate_tails(two_step, [0.5, 1], 5000, seed=3).to_json()
    assert a == b
    c = estimate_tails(two_step, [0.5, 1], 5000, seed=4).to_json()
    assert a != c


def test_zero_samples(two_step):
    with pytest.raises(ZeroSamples):
        estimate_tails(two_step, [1], 0, seed=1)
    with pytest.raises(ZeroSamples):
        wilson_interval(0, 0)


def test_estimate_invariants(two_step):
    for e in estimate_tails(two_step, [-5, 0, 1, 5], 2000, seed=2).pX:
        lo, hi = e.ci95
        assert 0 <= lo <= e.point_estimate <= hi <= 1


def test_wilson_reference_value():
    # reference: 50 successes in 100 trials, z = 1.959964
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.403832, abs=1e-6)
    assert hi == pytest.approx(0.596168, abs=1e-6)


def test_signs_are_counter_addressed():
    whole = sample_signs(300, 9, 0, 50)
    assert whole.shape == (50, 300)
    assert np.array_equal(whole[17:33], sample_signs(300, 9, 17, 33))


def test_signs_are_balanced():
    s = sample_signs(16, 1, 0, 40_000)
    assert abs(s.mean() - 0.5) < 0.01


@pytest.mark.parametrize("split", [1, 3, 7000])
def test_split_invariance(split):
    fam = gen_family("random", 8, 5)
    whole = sample_distributions(fam, 11, 0, 20_000)
    cuts = sorted({0, 20_000, *range(split, 20_000, split)}) if split > 1 else [0, 20_000]
    parts = [sample_distributions(fam, 11, a, b) for a, b in zip(cuts, cuts[1:])]
    merged = (merge_distributions([p[0] for p in parts]), merge_distributions([p[1] for p in parts]))
    for w, m in zip(whole, merged):
        assert np.array_equal(w.values, m.values) and np.array_equal(w.counts, m.counts)


def test_worker_invariance():
    fam = gen_family("random", 12, 1)
    a = estimate_tails(fam, [0.5, 1.0], 40_000, seed=5, workers=1).to_json()
    b = estimate_tails(fam, [0.5, 1.0], 40_000, seed=5, workers=2).to_json()
    assert a == b


def test_float_mode_for_non_dyadic():
    fam = constant_family([0.1, 0.3])
    rep = estimate_tails(fam, [0.2], 20_000, seed=1)
    assert rep.pY[0].contains(0.5)


def test_agrees_with_oracle_small():
    fam = gen_family("random", 6, 0)
    u = float(fam.terminal.sum()) / 4
    exact = float(enumerate_exact(fam, [u]).pX[0])
    assert estimate_tails(fam, [u], 50_000, seed=2).pX[0].contains(exact)
