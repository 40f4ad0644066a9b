"""Independent brute-force reference computations shared by the tests.

These use ``itertools.product`` over sign vectors and :class:`Fraction`
arithmetic only; they never call into the enumeration engine.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from lotail.family import constant, indicator, make_family


def brute_paths(fam):
    """``[(prob, X, Y, path)]`` over all sign vectors, everything exact."""
    cols = [[Fraction(float(f(t))) for f in fam.functions] for t in fam.times]
    w = Fraction(1, 2**fam.n)
    out = []
    for signs in itertools.product((1, -1), repeat=fam.n):
        path = [sum((s * a for s, a in zip(signs, col)), Fraction(0)) for col in cols]
        out.append((w, max(path), path[-1], signs))
    return out


def brute_tail(fam, u):
    u = Fraction(u)
    rows = brute_paths(fam)
    return sum(p for p, x, _, _ in rows if x >= u), sum(p for p, _, y, _ in rows if y >= u)


def brute_weights(weights):
    """``[(prob, Y)]`` for ``Y = sum w_i eps_i``."""
    w = [Fraction(float(x)) for x in weights]
    p = Fraction(1, 2 ** len(w))
    return [(p, sum((s * a for s, a in zip(signs, w)), Fraction(0))) for signs in itertools.product((1, -1), repeat=len(w))]


@pytest.fixture
def two_step():
    """``a_1 == 1`` and ``a_2 = 1_{[1/2, 1]}``."""
    return make_family([constant(1.0), indicator(1.0, 0.5)])


@pytest.fixture
def two_step_json(tmp_path):
    path = tmp_path / "f.json"
    path.write_text('{"n": 2, "functions": [[{"t": 0, "v": 1}], [{"t": 0, "v": 0}, {"t": 0.5, "v": 1}]]}')
    return path
