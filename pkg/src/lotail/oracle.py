"""Exact distributions by exhaustive enumeration of all 2**n sign vectors.

Sign vectors are visited in Gray-code order, so consecutive path vectors differ
by ``+-2 a_i`` for a single ``i``. The walk restarts from a directly computed
seed every ``BLOCK`` steps; that bounds float drift and lets any contiguous
range of Gray positions be evaluated on its own and merged afterwards.

In exact mode every coefficient is a multiple of ``2**-bits`` and path values
are carried as int64 fixed-point numbers, so probabilities are exact dyadic
rationals and threshold events have no tie ambiguity. Float mode classifies a
value within ``ATOL`` of a threshold as reaching it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyPointSet, InvalidParams, NotDyadic, TooManyVariables
from .family import SCALE_BITS, ProcessFamily, to_fixed

MAX_EXACT_N = 30
ATOL = 1e-12
BLOCK = 1024
CHUNK_CELLS = 1 << 22
MODES = ("exact", "float")

Number = Fraction | float


# --- sign vectors ------------------------------------------------------------


def encode_signs(signs: Sequence[int]) -> int:
    """Bit ``i`` is set iff ``signs[i] == +1``."""
    code = 0
    for i, s in enumerate(signs):
        if s not in (1, -1):
            raise InvalidParams(f"sign must be +1 or -1, got {s}")
        if s == 1:
            code |= 1 << i
    return code


def decode_signs(code: int, n: int) -> tuple[int, ...]:
    if not 0 <= code < (1 << n):
        raise DimensionMismatch(f"sign code {code} does not fit in {n} bits")
    return tuple(1 if (code >> i) & 1 else -1 for i in range(n))


def gray(k):
    return k ^ (k >> 1)


def _sign_matrix(codes: np.ndarray, n: int) -> np.ndarray:
    bits = (codes[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return 2 * bits - 1


# --- distributions -----------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """A finite discrete law given by sorted support points and integer counts.

    With ``bits`` set, ``values`` holds int64 numerators over ``2**bits`` and all
    probabilities and polynomial moments come back as :class:`Fraction`.
    """

    values: np.ndarray
    counts: np.ndarray
    total: int
    bits: int | None = None

    @property
    def exact(self) -> bool:
        return self.bits is not None

    @property
    def scale(self) -> int:
        return 1 << self.bits

    def real_values(self) -> np.ndarray:
        if self.exact:
            return self.values / float(self.scale)
        return self.values

    def _prob(self, count) -> Number:
        count = int(count)
        return Fraction(count, self.total) if self.exact else count / self.total

    def _ge_index(self, u) -> int:
        if u == -math.inf:
            return 0
        if self.exact:
            cut = math.ceil(Fraction(u) * self.scale)
            return int(np.searchsorted(self.values, cut, side="left")) if abs(cut) < 2**62 else (0 if cut < 0 else len(self.values))
        return int(np.searchsorted(self.values, float(u) - ATOL, side="left"))

    def _le_index(self, u) -> int:
        """Number of support points ``<= u``."""
        if self.exact:
            cut = math.floor(Fraction(u) * self.scale)
            return int(np.searchsorted(self.values, cut, side="right")) if abs(cut) < 2**62 else (0 if cut < 0 else len(self.values))
        return int(np.searchsorted(self.values, float(u) + ATOL, side="right"))

    def prob_ge(self, u) -> Number:
        return self._prob(self.counts[self._ge_index(u):].sum())

    def prob_le(self, u) -> Number:
        return self._prob(self.counts[: self._le_index(u)].sum())

    def prob_abs_dev(self, center, u) -> Number:
        """``P(|V - center| >= u)``."""
        if u <= 0:
            return self._prob(self.total)
        hi = self.counts[self._ge_index(Fraction(center) + Fraction(u) if self.exact else center + u):].sum()
        lo = self.counts[: self._le_index(Fraction(center) - Fraction(u) if self.exact else center - u)].sum()
        return self._prob(hi + lo)

    def _obj(self):
        return self.values.astype(object), self.counts.astype(object)

    def mean(self) -> Number:
        if self.exact:
            v, c = self._obj()
            return Fraction(int((v * c).sum()), self.total * self.scale)
        return math.fsum(self.values * self.counts) / self.total

    def expect_hinge(self, u) -> Number:
        """``E(V - u)_+``."""
        i = self._ge_index(u)
        if self.exact:
            v, c = self._obj()
            s = int((v[i:] * c[i:]).sum()) if i < len(v) else 0
            mass = int(c[i:].sum()) if i < len(v) else 0
            return max(Fraction(s, self.total * self.scale) - Fraction(u) * Fraction(mass, self.total), Fraction(0))
        return max(math.fsum((self.values[i:] - u) * self.counts[i:]) / self.total, 0.0)

    def positive_part_mean(self) -> Number:
        return self.expect_hinge(0)

    def central_abs_moment(self, p, center=0) -> Number:
        """``E|V - center|**p``; exact for integer ``p`` in exact mode."""
        if self.exact and float(p).is_integer():
            p = int(p)
            c = Fraction(center)
            v, cnt = self._obj()
            dev = v * c.denominator - c.numerator * self.scale
            num = int((np.abs(dev) ** p * cnt).sum())
            return Fraction(num, self.total * (self.scale * c.denominator) ** p)
        x = np.abs(self.real_values() - float(center))
        return math.fsum(x**p * self.counts) / self.total

    def expect(self, fn, shift=0.0) -> float:
        """Float ``E fn(V - shift)`` with ``fn`` vectorized."""
        return math.fsum(fn(self.real_values() - float(shift)) * self.counts) / self.total

    def support_max(self) -> float:
        return float(self.real_values()[-1])

    def support_min(self) -> float:
        return float(self.real_values()[0])


def merge_distributions(parts: Sequence[Distribution]) -> Distribution:
    """Pool counts; associative and commutative."""
    bits = parts[0].bits
    if any(p.bits != bits for p in parts):
        raise InvalidParams("cannot merge distributions with different scales")
    vals = np.concatenate([p.values for p in parts])
    cnts = np.concatenate([p.counts for p in parts])
    uniq, inv = np.unique(vals, return_inverse=True)
    pooled = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(pooled, inv, cnts)
    return Distribution(uniq, pooled, sum(p.total for p in parts), bits)


def _histogram(values: np.ndarray, bits) -> Distribution:
    uniq, cnts = np.unique(values, return_counts=True)
    return Distribution(uniq, cnts.astype(np.int64), len(values), bits)


# --- the Gray-code walk ------------------------------------------------------


def _prepare(A, offsets, mode: str, bits: int = SCALE_BITS):
    """Coefficients as int64 fixed point (exact) or float64, plus the scale bits."""
    if mode not in MODES:
        raise InvalidParams(f"mode must be one of {MODES}")
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    b = np.zeros(A.shape[1]) if offsets is None else np.asarray(offsets, dtype=float)
    if mode == "exact":
        return to_fixed(A, bits), to_fixed(b, bits), bits
    return A, b, None


def gray_paths(A: np.ndarray, lo: int, hi: int, block: int = BLOCK):
    """Path vectors ``eps . A`` for Gray positions ``lo <= k < hi``.

    Returns ``(codes, paths)`` where ``codes[j]`` is the sign bitmask visited at
    position ``lo + j``. Inside each block of ``block`` positions the rows come
    from one-sign updates; each block starts from a direct evaluation.
    """
    n, M = A.shape
    L = hi - lo
    k = np.arange(lo, hi, dtype=np.int64)
    codes = gray(k)
    rel = np.arange(L)
    starts = rel % block == 0
    low = k & -k
    bit = np.zeros(L, dtype=np.int64)
    nz = low > 0
    bit[nz] = np.frexp(low[nz].astype(float))[1] - 1
    up = (codes >> bit) & 1
    step = 2 * (2 * up - 1)
    deltas = step[:, None] * A[bit]
    deltas[starts] = _sign_matrix(codes[starts], n) @ A
    pad = (-L) % block
    if pad:
        deltas = np.concatenate([deltas, np.zeros((pad, M), dtype=deltas.dtype)])
    blocks = deltas.reshape(-1, block, M)
    np.cumsum(blocks, axis=1, out=blocks)
    return codes, blocks.reshape(-1, M)[:L]


def naive_paths(A: np.ndarray, codes: np.ndarray) -> np.ndarray:
    return _sign_matrix(np.asarray(codes, dtype=np.int64), A.shape[0]) @ A


def _chunk_stats(A, b, bits, lo, hi):
    _, paths = gray_paths(A, lo, hi)
    if b.any():
        paths = paths + b
    return _histogram(paths.max(axis=1), bits), _histogram(paths[:, -1], bits)


def _chunk_bounds(n: int, M: int) -> list[tuple[int, int]]:
    total = 1 << n
    rows = max(BLOCK, (CHUNK_CELLS // max(M, 1)) // BLOCK * BLOCK)
    return [(lo, min(lo + rows, total)) for lo in range(0, total, rows)]


def enumerate_distributions(A, offsets=None, mode: str = "exact", workers: int = 1, bits: int = SCALE_BITS):
    """Laws of ``max_j (eps . A[:, j] + b_j)`` and of the last column over all ``eps``."""
    Aq, b, bits = _prepare(A, offsets, mode, bits)
    n, M = Aq.shape
    if n > MAX_EXACT_N:
        raise TooManyVariables(f"n={n} exceeds the enumeration cap {MAX_EXACT_N}; use montecarlo")
    chunks = _chunk_bounds(n, M)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_stats, *zip(*[(Aq, b, bits, lo, hi) for lo, hi in chunks])))
    else:
        parts = [_chunk_stats(Aq, b, bits, lo, hi) for lo, hi in chunks]
    return merge_distributions([p[0] for p in parts]), merge_distributions([p[1] for p in parts])


def sup_by_sign(A, offsets=None, mode: str = "exact", naive: bool = False) -> np.ndarray:
    """``sup`` value for every sign code ``0 .. 2**n - 1`` (natural order, real units)."""
    Aq, b, bits = _prepare(A, offsets, mode)
    n = Aq.shape[0]
    if n > 20:
        raise TooManyVariables("per-sign arrays are limited to n <= 20")
    if naive:
        codes = np.arange(1 << n, dtype=np.int64)
        paths = naive_paths(Aq, codes)
    else:
        codes, paths = gray_paths(Aq, 0, 1 << n)
    out = np.empty(1 << n, dtype=paths.dtype)
    out[codes] = (paths + b).max(axis=1)
    return out / float(1 << bits) if bits is not None else out


@lru_cache(maxsize=4096)
def family_distributions(fam: ProcessFamily, mode: str = "exact") -> tuple[Distribution, Distribution]:
    """``(law of X, law of Y)`` for a family; cached since families are immutable."""
    return enumerate_distributions(fam.coefficients, mode=mode)


@lru_cache(maxsize=4096)
def _weights_distribution(weights: tuple, mode: str) -> Distribution:
    return enumerate_distributions(np.asarray(weights)[:, None], mode=mode)[1]


def weights_distribution(weights, mode: str = "exact") -> Distribution:
    """Law of ``Y = sum_i w_i eps_i``."""
    return _weights_distribution(tuple(float(w) for w in weights), mode)


# --- public operations -------------------------------------------------------


@dataclass(frozen=True)
class PathEval:
    sign: int
    sup_value: float
    argmax_time: float


def path_sup(fam: ProcessFamily, sign) -> PathEval:
    """Supremum of one path; ties go to the earliest time."""
    if isinstance(sign, (int, np.integer)):
        code = int(sign)
        decode_signs(code, fam.n)
    else:
        if len(sign) != fam.n:
            raise DimensionMismatch(f"sign vector has length {len(sign)}, family has n={fam.n}")
        code = encode_signs(sign)
    eps = np.array(decode_signs(code, fam.n), dtype=float)
    path = eps @ fam.coefficients
    j = int(np.argmax(path))
    return PathEval(code, float(path[j]), fam.times[j])


def prob_json(p: Number, n: int | None = None):
    """Exact dyadic probabilities as ``{"num", "den2exp"}``, floats unchanged."""
    if isinstance(p, Fraction):
        den = p.denominator
        e = den.bit_length() - 1
        if den != 1 << e:
            return float(p)
        if n is not None and e < n:
            return {"num": p.numerator << (n - e), "den2exp": n}
        return {"num": p.numerator, "den2exp": e}
    return float(p)


@dataclass(frozen=True)
class TailReport:
    n: int
    mode: str
    thresholds: tuple[float, ...]
    pX: tuple[Number, ...]
    pY: tuple[Number, ...]
    pAbsDev: tuple[Number, ...]
    EX: Number
    EYplus: Number
    moments: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        enc = lambda seq: [prob_json(p, self.n) for p in seq]
        return {
            "n": self.n,
            "mode": self.mode,
            "thresholds": list(self.thresholds),
            "pX": enc(self.pX),
            "pY": enc(self.pY),
            "pAbsDev": enc(self.pAbsDev),
            "EX": float(self.EX),
            "EYplus": float(self.EYplus),
            "moments": {str(p): float(v) for p, v in self.moments.items()},
        }


def tail_report(dx: Distribution, dy: Distribution, n: int, mode: str, thresholds, moment_orders=()) -> TailReport:
    ex = dx.mean()
    return TailReport(
        n=n,
        mode=mode,
        thresholds=tuple(float(u) for u in thresholds),
        pX=tuple(dx.prob_ge(u) for u in thresholds),
        pY=tuple(dy.prob_ge(u) for u in thresholds),
        pAbsDev=tuple(dx.prob_abs_dev(ex, u) for u in thresholds),
        EX=ex,
        EYplus=dy.positive_part_mean(),
        moments={p: dy.central_abs_moment(p) for p in moment_orders},
    )


def enumerate_exact(fam: ProcessFamily, thresholds=(), moment_orders=(), mode: str = "exact", workers: int = 1) -> TailReport:
    if fam.n > MAX_EXACT_N:
        raise TooManyVariables(f"n={fam.n} exceeds the enumeration cap {MAX_EXACT_N}")
    if workers > 1:
        dx, dy = enumerate_distributions(fam.coefficients, mode=mode, workers=workers)
    else:
        dx, dy = family_distributions(fam, mode)
    return tail_report(dx, dy, fam.n, mode, thresholds, moment_orders)


# --- phi-gap on boxes and finite point sets ----------------------------------


PHI_KINDS = ("exp", "hinge", "power", "square")


@dataclass(frozen=True)
class PhiSpec:
    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in PHI_KINDS:
            raise InvalidParams(f"unknown phi kind {self.kind!r}")
        if self.kind == "power" and self.param < 1:
            raise InvalidParams("power phi needs p >= 1")

    @property
    def increasing(self) -> bool:
        return self.kind in ("exp", "hinge") and not (self.kind == "exp" and self.param < 0)

    def label(self) -> str:
        return self.kind if self.kind == "square" else f"{self.kind}({self.param:g})"

    def expect(self, dist: Distribution, shift) -> Number:
        """``E phi(V - shift)``."""
        if self.kind == "exp":
            lam = float(self.param)
            return dist.expect(lambda x: np.exp(lam * x), float(shift))
        if self.kind == "hinge":
            if dist.exact:
                return dist.expect_hinge(Fraction(shift) + Fraction(self.param))
            return dist.expect_hinge(float(shift) + self.param)
        p = 2 if self.kind == "square" else self.param
        return dist.central_abs_moment(p, shift)


@dataclass(frozen=True)
class BoxSpec:
    """The box ``prod_i [0, t0_i]``, optionally restricted to listed points with offsets."""

    t0: tuple[float, ...]
    points: tuple[tuple[float, ...], ...] | None = None
    offsets: tuple[float, ...] | None = None

    def __post_init__(self):
        if any(t < 0 for t in self.t0):
            raise InvalidParams("box corner must be nonnegative")
        if self.points is not None:
            if len(self.points) == 0:
                raise EmptyPointSet("point set is empty")
            for pt in self.points:
                if len(pt) != len(self.t0):
                    raise DimensionMismatch("point dimension differs from the box")
                if any(x < 0 or x > t for x, t in zip(pt, self.t0)):
                    raise InvalidParams(f"point {pt} lies outside the box")
            if self.offsets is not None and len(self.offsets) != len(self.points):
                raise DimensionMismatch("one offset per point is required")

    @property
    def n(self) -> int:
        return len(self.t0)


def box_sup_distribution(box: BoxSpec, mode: str = "exact") -> Distribution:
    if box.n > MAX_EXACT_N:
        raise TooManyVariables(f"n={box.n} exceeds the enumeration cap {MAX_EXACT_N}")
    t0 = np.asarray(box.t0, dtype=float)
    if box.points is None:
        # sup over the whole box is sum_i t0_i 1{eps_i = +1} = (Y + sum t0) / 2,
        # one extra bit keeps the halves integral
        return enumerate_distributions(t0[:, None] / 2, [t0.sum() / 2], mode=mode, bits=SCALE_BITS + 1)[0]
    P = np.asarray(box.points, dtype=float).T
    return enumerate_distributions(P, box.offsets, mode=mode)[0]


def box_sup_mean_closed_form(box: BoxSpec) -> Fraction:
    return sum((Fraction(float(t)) for t in box.t0), Fraction(0)) / 2


def phi_gap(box: BoxSpec, phi: PhiSpec, mode: str = "exact") -> tuple[Number, Number]:
    """``(E phi(X - EX), E phi(Y))`` with ``Y = sum t0_i eps_i``."""
    dx = box_sup_distribution(box, mode)
    dy = weights_distribution(box.t0, mode)
    ex = dx.mean()
    if box.points is None and mode == "exact" and ex != box_sup_mean_closed_form(box):
        raise AssertionError("enumerated box mean disagrees with sum(t0)/2")
    return phi.expect(dx, ex), phi.expect(dy, 0)


# --- classic maximal inequality and the convolution bound ---------------------


def partial_sum_matrix(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    return np.triu(np.ones((len(w), len(w)))) * w[:, None]


def classic_lo_stats(weights, u, mode: str = "exact") -> tuple[Number, Number]:
    """``(P(max_k S_k >= u), P(S_n >= u))`` for ``S_k = sum_{i<=k} w_i eps_i``."""
    if len(weights) > MAX_EXACT_N:
        raise TooManyVariables(f"n={len(weights)} exceeds the enumeration cap {MAX_EXACT_N}")
    dmax, dlast = _classic_distributions(tuple(float(w) for w in weights), mode)
    return dmax.prob_ge(u), dlast.prob_ge(u)


@lru_cache(maxsize=4096)
def _classic_distributions(weights: tuple, mode: str):
    return enumerate_distributions(partial_sum_matrix(weights), mode=mode)


def kahane_integral(weights, u, mode: str = "exact") -> tuple[Number, Number]:
    """``(E(Y - u)_+, 4 P(Y >= u) E(Y)_+)``; the left side is the integral of the tail above ``u``."""
    if len(weights) > MAX_EXACT_N:
        raise TooManyVariables(f"n={len(weights)} exceeds the enumeration cap {MAX_EXACT_N}")
    dy = weights_distribution(weights, mode)
    return dy.expect_hinge(u), 4 * dy.prob_ge(u) * dy.positive_part_mean()


def ensure_dyadic(fam: ProcessFamily) -> None:
    if not fam.is_dyadic():
        raise NotDyadic("exact mode needs values that are multiples of 2**-20")
