"""Seeded Monte-Carlo estimates of the tail quantities, for n past enumeration range.

Signs come from the counter-based Philox4x64 generator keyed by the seed:
sample ``i`` owns counter blocks ``[i*b, (i+1)*b)`` with ``b = ceil(n/256)``,
and its signs are the low ``n`` bits of those blocks. Any range of sample
indices can therefore be drawn independently, and since results are pooled as
integer-count histograms, splitting the budget across workers reproduces the
single-stream estimate exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .errors import NotDyadic, ZeroSamples
from .family import SCALE_BITS, ProcessFamily, to_fixed
from .oracle import Distribution, _histogram, merge_distributions

CHUNK_SAMPLES = 1 << 14
Z95 = NormalDist().inv_cdf(0.975)


@dataclass(frozen=True)
class MCEstimate:
    point_estimate: float
    ci95: tuple[float, float]
    samples: int
    seed: int

    def contains(self, p: float) -> bool:
        return self.ci95[0] <= p <= self.ci95[1]

    def to_json(self) -> dict:
        return {"estimate": self.point_estimate, "ci95": list(self.ci95), "samples": self.samples, "seed": self.seed}


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ZeroSamples("no samples")
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def sample_signs(n: int, seed: int, lo: int, hi: int) -> np.ndarray:
    """Boolean ``(hi - lo, n)`` matrix; entry ``[j, i]`` is True iff ``eps_i = +1`` in sample ``lo + j``."""
    blocks = -(-n // 256)
    bg = np.random.Philox(key=seed, counter=lo * blocks)
    raw = bg.random_raw((hi - lo) * 4 * blocks).reshape(hi - lo, 4 * blocks)
    bits = np.unpackbits(raw.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n].astype(bool)


def _paths(A: np.ndarray, plus: np.ndarray) -> np.ndarray:
    # accumulate one coordinate at a time so float rounding never depends on batch size
    out = np.zeros((plus.shape[0], A.shape[1]), dtype=A.dtype)
    for i in range(A.shape[0]):
        out += np.where(plus[:, i, None], A[i], -A[i])
    return out


def _fixed_or_float(fam: ProcessFamily, mode: str):
    if mode == "exact":
        return to_fixed(fam.coefficients), SCALE_BITS
    if mode == "auto":
        try:
            return to_fixed(fam.coefficients), SCALE_BITS
        except NotDyadic:
            pass
    return np.asarray(fam.coefficients, dtype=float), None


def _chunk(A, bits, seed, lo, hi):
    paths = _paths(A, sample_signs(A.shape[0], seed, lo, hi))
    return _histogram(paths.max(axis=1), bits), _histogram(paths[:, -1], bits)


def sample_distributions(fam: ProcessFamily, seed: int, lo: int, hi: int, mode: str = "auto", workers: int = 1):
    """Empirical laws of ``X`` and ``Y`` over sample indices ``[lo, hi)``."""
    if hi <= lo:
        raise ZeroSamples("sample range is empty")
    A, bits = _fixed_or_float(fam, mode)
    bounds = [(a, min(a + CHUNK_SAMPLES, hi)) for a in range(lo, hi, CHUNK_SAMPLES)]
    jobs = [(A, bits, seed, a, b) for a, b in bounds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, *zip(*jobs)))
    else:
        parts = [_chunk(*job) for job in jobs]
    return merge_distributions([p[0] for p in parts]), merge_distributions([p[1] for p in parts])


@dataclass(frozen=True)
class MCReport:
    n: int
    thresholds: tuple[float, ...]
    pX: tuple[MCEstimate, ...]
    pY: tuple[MCEstimate, ...]
    EX: float
    EX_stderr: float
    samples: int
    seed: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mode": "montecarlo",
            "samples": self.samples,
            "seed": self.seed,
            "thresholds": list(self.thresholds),
            "pX": [e.point_estimate for e in self.pX],
            "pY": [e.point_estimate for e in self.pY],
            "pX_ci95": [list(e.ci95) for e in self.pX],
            "pY_ci95": [list(e.ci95) for e in self.pY],
            "EX": self.EX,
            "EX_stderr": self.EX_stderr,
        }


def _estimate(dist: Distribution, u: float, seed: int) -> MCEstimate:
    k = int(dist.counts[dist._ge_index(u):].sum())
    return MCEstimate(k / dist.total, wilson_interval(k, dist.total), dist.total, seed)


def report_from(dx: Distribution, dy: Distribution, n: int, thresholds, seed: int) -> MCReport:
    mean = float(dx.mean())
    second = dx.expect(np.square, mean)
    stderr = math.sqrt(second / max(dx.total - 1, 1))
    return MCReport(
        n=n,
        thresholds=tuple(float(u) for u in thresholds),
        pX=tuple(_estimate(dx, u, seed) for u in thresholds),
        pY=tuple(_estimate(dy, u, seed) for u in thresholds),
        EX=mean,
        EX_stderr=stderr,
        samples=dx.total,
        seed=seed,
    )


def estimate_tails(fam: ProcessFamily, thresholds, samples: int, seed: int, mode: str = "auto", workers: int = 1) -> MCReport:
    """Estimate ``P(X >= u)`` and ``P(Y >= u)`` with 95% Wilson intervals, plus ``EX``."""
    if samples < 1:
        raise ZeroSamples("samples must be >= 1")
    dx, dy = sample_distributions(fam, seed, 0, samples, mode, workers)
    return report_from(dx, dy, fam.n, thresholds, seed)
