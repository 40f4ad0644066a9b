"""Generic chaining bound for ``E sup_t sum_i a_i(t) eps_i`` over variance-quantile nets.

The net at level ``k`` has ``N_k`` points ``u_l = inf{t : V(t) >= (l/N_k) V(1)}``,
``l = 0 .. N_k - 1``, and consecutive levels are nested when ``N_{k-1} | N_k``.
A parameter plan ``(C_k, p_k, N_k)`` turns the chaining sum into a numerical
constant ``C`` with ``EX <= C ||a(1)||``; level ``k`` contributes

    C_k sqrt((p_k - 1) / N_{k-1}) * (1 + N_k / (2 (p_k - 1)) * ((p_k - 1) / (C_k p_k))**p_k).

``N_k`` grows doubly exponentially, so counts are exact Python integers, all
level quantities are evaluated as logarithms, and sums use ``math.fsum``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NonNestedCounts, ParamOutOfRange, ZeroVariance
from .family import ProcessFamily

PUBLISHED_CONSTANT = 4.45
LOG2 = math.log(2.0)
# Beyond this many bits, the nearest multiple is resolved only to double precision.
EXACT_QUOTIENT_BITS = 52
TIE_TOL = 1e-12
# exp() underflows below this; such terms are carried in the log only.
LOG_TINY = -745.0
MAX_TAIL_LEVELS = 200


# --- nets ----------------------------------------------------------------------


@dataclass(frozen=True)
class NetLevel:
    """Distinct points of one net level.

    ``first_index[j]`` and ``last_index[j]`` give the range of indices ``l``
    whose quantile point ``u_l`` equals ``times[j]``; ``merged_index[j]`` locates
    it among the family's merged breakpoint times.
    """

    k: int
    N: int
    times: tuple[float, ...]
    first_index: tuple[int, ...]
    last_index: tuple[int, ...]
    merged_index: tuple[int, ...]

    def points(self, limit: int = 1 << 20) -> list[float]:
        """All ``N`` points ``u_0 .. u_{N-1}`` with repetitions."""
        if self.N > limit:
            raise ValueError(f"net level has {self.N} points; refusing to materialize")
        out = []
        for t, a, b in zip(self.times, self.first_index, self.last_index):
            out.extend([t] * (b - a + 1))
        return out

    def project_index(self, j: int) -> int:
        """Merged-time index of ``pi_k(t)`` for the merged time with index ``j``."""
        pos = int(np.searchsorted(self.merged_index, j, side="right")) - 1
        return self.merged_index[pos]

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "N": encode_count(self.N),
            "distinct_points": [
                {"t": t, "l_first": encode_count(a), "l_last": encode_count(b)}
                for t, a, b in zip(self.times, self.first_index, self.last_index)
            ],
        }


@dataclass(frozen=True)
class ChainingNet:
    levels: tuple[NetLevel, ...]

    def to_json(self) -> dict:
        return {"levels": [lv.to_json() for lv in self.levels]}


def _net_level(fam: ProcessFamily, k: int, N: int) -> NetLevel:
    V = fam.variance_exact
    V1 = V[-1]
    times, first, last, idx = [], [], [], []
    prev_top = -1
    for j, v in enumerate(V):
        top = min(math.floor(N * v / V1), N - 1)
        lo = prev_top + 1
        if lo <= top:
            times.append(fam.times[j])
            first.append(lo)
            last.append(top)
            idx.append(j)
        prev_top = max(prev_top, top)
    return NetLevel(k, N, tuple(times), tuple(first), tuple(last), tuple(idx))


def build_net(fam: ProcessFamily, Ns: Sequence[int]) -> ChainingNet:
    """Variance-quantile nets, one level per count in ``Ns`` (levels numbered from 0)."""
    if fam.variance_exact[-1] == 0:
        raise ZeroVariance("V(1) = 0: the process is identically zero")
    Ns = [int(N) for N in Ns]
    if any(N < 1 for N in Ns):
        raise NonNestedCounts("net sizes must be positive")
    for a, b in zip(Ns, Ns[1:]):
        if b % a:
            raise NonNestedCounts(f"{a} does not divide {b}")
    return ChainingNet(tuple(_net_level(fam, k, N) for k, N in enumerate(Ns)))


def increment_sq(fam: ProcessFamily, j: int, i: int) -> Fraction:
    """``||a(t_j) - a(t_i)||**2`` exactly."""
    A = fam.coefficients
    return sum((Fraction(float(x)) - Fraction(float(y))) ** 2 for x, y in zip(A[:, j], A[:, i]))


# --- scalar pieces of the constant ---------------------------------------------


def _log_correction(C: float, p: float, N) -> float:
    """``log( N/2 * 1/(p-1) * ((p-1)/(C p))**p )``."""
    return -LOG2 + math.log(N) - math.log(p - 1) + p * (math.log1p(-1.0 / p) - math.log(C))


def log_kwa_bound(C: float, p: float) -> float:
    if C < 1 or p < 2:
        raise ParamOutOfRange(f"need C >= 1 and p >= 2, got C={C}, p={p}")
    return -LOG2 + math.log(C) - math.log(p - 1) + p * (math.log1p(-1.0 / p) - math.log(C))


def kwa_bound(C: float, p: float) -> float:
    """One-sided moment bound ``E(X_t/||X_t||_p - C)_+ <= C/(2(p-1)) ((p-1)/(Cp))**p``."""
    return math.exp(log_kwa_bound(C, p))


def log_f_minimizer(k: int, N_prev) -> float:
    two_k = 2.0**k
    return (
        (math.log(2.0 ** (k + 1) - 1) + math.log(two_k - 1)) / 3
        - (2.0 / 3.0) * two_k * math.log1p(-1.0 / two_k)
        + math.log(N_prev) / 3
        + two_k * LOG2
    )


def f_minimizer(k: int, N_prev) -> float:
    """Minimizer of the level-``k`` balancing function for the template ``C_k = 2``, ``p_k = 2**k``."""
    lx = log_f_minimizer(k, N_prev)
    return math.exp(lx) if lx < 709 else math.inf


def nearest_multiple(N_prev: int, log_x: float) -> int:
    """Multiple of ``N_prev`` nearest ``exp(log_x)``; ties round up, never below ``N_prev``."""
    log_q = log_x - math.log(N_prev)
    if log_q < EXACT_QUOTIENT_BITS * LOG2:
        qf = math.exp(log_x) / N_prev if log_x < 709 else math.exp(log_q)
        q = math.floor(qf)
        # log/exp round trips blur exact ties, so treat near-halves as ties
        if qf - q >= 0.5 - TIE_TOL:
            q += 1
    else:
        log2_q = log_q / LOG2
        e = math.floor(log2_q) - EXACT_QUOTIENT_BITS
        q = round(2.0 ** (log2_q - e)) << e
    return N_prev * max(q, 1)


def template_next(k: int, N_prev: int) -> tuple[float, float, int]:
    """Template level: ``C = 1`` at level 1 else 2, ``p = 2**k``, ``N`` from the balancing minimizer."""
    C = 1.0 if k == 1 else 2.0
    return C, 2.0**k, nearest_multiple(N_prev, log_f_minimizer(k, N_prev))


def log_level_term(C: float, p: float, N_prev, N) -> float:
    lead = math.log(C) + 0.5 * (math.log(p - 1) - math.log(N_prev))
    return lead + float(np.logaddexp(0.0, _log_correction(C, p, N)))


# --- plans ---------------------------------------------------------------------


@dataclass(frozen=True)
class PlanLevel:
    k: int
    C: float
    p: float
    N: int


@dataclass(frozen=True)
class ConstantPlan:
    """Levels ``1 .. K``; ``N_0 = 1`` is implicit."""

    levels: tuple[PlanLevel, ...]
    label: str = "custom"

    def __post_init__(self):
        prev = 1
        for i, lv in enumerate(self.levels, start=1):
            if lv.k != i:
                raise ParamOutOfRange("levels must be numbered 1..K")
            if lv.C < 1 or lv.p < 2:
                raise ParamOutOfRange(f"level {i}: need C >= 1 and p >= 2")
            if lv.N < prev or lv.N % prev:
                raise NonNestedCounts(f"level {i}: N={lv.N} is not a multiple of {prev}")
            prev = lv.N

    @property
    def K(self) -> int:
        return len(self.levels)

    def counts(self) -> list[int]:
        return [1] + [lv.N for lv in self.levels]


@dataclass(frozen=True)
class ConstantTotal:
    terms: tuple[float, ...]
    log_terms: tuple[float, ...]
    tail_bound: float
    tail_log: float
    tail_levels: int
    total: float

    @property
    def paper_claim_met(self) -> bool:
        return self.total <= PUBLISHED_CONSTANT


def _tail(K: int, N_K: int) -> tuple[float, int]:
    """Log of an upper bound on the levels ``k > K`` continued with the template.

    Levels are summed explicitly until their terms underflow and shrink at
    least geometrically by 1/2; the remainder is then at most the last term,
    which doubling the explicit sum covers.
    """
    logs = []
    N_prev = N_K
    for k in range(K + 1, K + 1 + MAX_TAIL_LEVELS):
        C, p, N = template_next(k, N_prev)
        logs.append(log_level_term(C, p, N_prev, N))
        N_prev = N
        if len(logs) >= 2 and logs[-1] < LOG_TINY and logs[-1] - logs[-2] <= -LOG2:
            break
    top = max(logs)
    log_sum = top + math.log(math.fsum(math.exp(x - top) for x in logs))
    return log_sum + LOG2, len(logs)


def total_constant(plan: ConstantPlan) -> ConstantTotal:
    """Sum of level terms plus a bound on the truncated tail."""
    logs = []
    N_prev = 1
    for lv in plan.levels:
        logs.append(log_level_term(lv.C, lv.p, N_prev, lv.N))
        N_prev = lv.N
    tail_log, tail_levels = _tail(plan.K, N_prev)
    # the smallest positive double still bounds an underflowed tail from above
    tail = max(math.exp(tail_log), 5e-324) if tail_log < 709 else math.inf
    terms = tuple(math.exp(x) for x in logs)
    return ConstantTotal(
        terms=terms,
        log_terms=tuple(logs),
        tail_bound=tail,
        tail_log=tail_log,
        tail_levels=tail_levels,
        total=math.fsum(terms) + tail,
    )


def paper_plan(K: int) -> ConstantPlan:
    """``C_1 = 1``, ``C_k = 2``, ``p_k = 2**k``, ``N_k`` the multiple of ``N_{k-1}`` nearest the balancing minimizer."""
    if K < 1:
        raise ParamOutOfRange("K must be >= 1")
    levels = []
    N_prev = 1
    for k in range(1, K + 1):
        C, p, N = template_next(k, N_prev)
        levels.append(PlanLevel(k, C, p, N))
        N_prev = N
    return ConstantPlan(tuple(levels), label="template")


def plan_from_free(K: int, C: Sequence[float], p: Sequence[float], mult: Sequence[int], label="custom") -> ConstantPlan:
    """Levels ``1..F`` from explicit ``(C_k, p_k, N_k/N_{k-1})``; levels ``F+1..K`` follow the template."""
    levels = []
    N_prev = 1
    for k, (c, pk, m) in enumerate(zip(C, p, mult), start=1):
        N_prev = N_prev * int(m)
        levels.append(PlanLevel(k, float(c), float(pk), N_prev))
    for k in range(len(levels) + 1, K + 1):
        c, pk, N_prev = template_next(k, N_prev)
        levels.append(PlanLevel(k, c, pk, N_prev))
    return ConstantPlan(tuple(levels), label=label)


# --- numerical re-optimization ----------------------------------------------------

C_RANGE = (1.0, 4.0)
P_MAX = 2.0**20
FREE_LEVELS = 6
RESTART_EVERY = 400


def _clip(params, F):
    C, p, m = params
    C = [min(max(c, C_RANGE[0]), C_RANGE[1]) for c in C]
    p = [min(max(x, 2.0), P_MAX) for x in p]
    m = [max(int(x), 1) for x in m]
    return C, p, m


def optimize_plan(K: int, budget: int, seed: int, free_levels: int = FREE_LEVELS) -> ConstantPlan:
    """Coordinate descent with random restarts over ``(C_k, p_k, N_k/N_{k-1})`` of the first levels.

    Starts from :func:`paper_plan` and only accepts strict improvements, so the
    result never has a larger total. ``budget`` counts plan evaluations; the
    search is deterministic for a given seed.
    """
    base = paper_plan(K)
    if budget <= 0:
        return base
    F = min(K, free_levels)
    rng = np.random.default_rng(seed)

    def evaluate(params):
        C, p, m = params
        try:
            return total_constant(plan_from_free(K, C, p, m)).total
        except (OverflowError, ValueError):
            return math.inf

    prev = [1] + [lv.N for lv in base.levels]
    start = (
        [lv.C for lv in base.levels[:F]],
        [lv.p for lv in base.levels[:F]],
        [prev[k] // prev[k - 1] for k in range(1, F + 1)],
    )
    best, best_val = start, evaluate(start)
    cur, cur_val = best, best_val
    steps = [0.5, 0.5, 1.0]  # C additive, log p, log m
    evals = 1
    since_restart = 0
    while evals < budget:
        improved = False
        for group in range(3):
            for i in range(F):
                for direction in (1, -1):
                    if evals >= budget:
                        break
                    cand = [list(x) for x in cur]
                    if group == 0:
                        cand[0][i] += direction * steps[0]
                    elif group == 1:
                        cand[1][i] *= math.exp(direction * steps[1])
                    else:
                        old = cand[2][i]
                        new = int(round(old * math.exp(direction * steps[2])))
                        cand[2][i] = new if new != old else old + direction
                    cand = _clip(cand, F)
                    val = evaluate(cand)
                    evals += 1
                    since_restart += 1
                    if val < cur_val:
                        cur, cur_val, improved = cand, val, True
        if cur_val < best_val:
            best, best_val = cur, cur_val
        if not improved:
            steps = [s / 2 for s in steps]
        if since_restart >= RESTART_EVERY or max(steps) < 1e-6:
            # restart from a random perturbation of the incumbent
            C, p, m = best
            cand = (
                [c + rng.normal(0, 0.5) for c in C],
                [x * math.exp(rng.normal(0, 0.5)) for x in p],
                [max(1, int(round(x * math.exp(rng.normal(0, 0.7))))) for x in m],
            )
            cur = _clip(cand, F)
            cur_val = evaluate(cur)
            evals += 1
            steps = [0.5, 0.5, 1.0]
            since_restart = 0
            if cur_val < best_val:
                best, best_val = cur, cur_val
    if not best_val < total_constant(base).total:
        return base
    return plan_from_free(K, *best, label="optimized")


# --- per-family bound -------------------------------------------------------------


@dataclass(frozen=True)
class FamilyBound:
    bound: float
    chain: float
    residual: float
    closure_level: int | None
    level_terms: tuple[float, ...]
    cap: float

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "chain": self.chain,
            "residual": self.residual,
            "closure_level": self.closure_level,
            "level_terms": list(self.level_terms),
            "cap": self.cap,
        }


def min_variance_gap(fam: ProcessFamily) -> Fraction | None:
    V = sorted(set(fam.variance_exact))
    gaps = [b - a for a, b in zip(V, V[1:])]
    return min(gaps) if gaps else None


def closure_level(fam: ProcessFamily, counts: Sequence[int]) -> int | None:
    """First level ``k`` with ``V(1)/N_k`` below every jump of ``V``; ``None`` if no listed level closes."""
    V1 = fam.variance_exact[-1]
    gap = min_variance_gap(fam)
    for k, N in enumerate(counts):
        if gap is None or V1 / N < gap:
            return k
    return None


def family_bound_detail(fam: ProcessFamily, plan: ConstantPlan | None = None) -> FamilyBound:
    plan = plan or paper_plan(12)
    V = fam.variance_exact
    V1 = V[-1]
    if V1 == 0:
        raise ZeroVariance("V(1) = 0")
    norm = math.sqrt(V1)
    counts = plan.counts()
    kstar = closure_level(fam, counts)
    last = plan.K if kstar is None else kstar
    prev = _net_level(fam, 0, 1)
    terms = []
    for k in range(1, last + 1):
        lv = plan.levels[k - 1]
        level = _net_level(fam, k, lv.N)
        sq = [increment_sq(fam, j, prev.project_index(j)) for j in level.merged_index]
        moving = sum(1 for s in sq if s > 0)
        delta = math.sqrt(max(sq)) * (1 + 1e-15) if sq else 0.0
        delta = min(delta, norm / math.sqrt(counts[k - 1]))
        if moving:
            corr = math.exp(_log_correction(lv.C, lv.p, moving))
            terms.append(lv.C * math.sqrt(lv.p - 1) * delta * (1 + corr))
        else:
            terms.append(0.0)
        prev = level
    residual = 0.0
    if kstar is None:
        sq = [increment_sq(fam, j, prev.project_index(j)) for j in range(len(fam.times))]
        moving = sum(1 for s in sq if s > 0)
        if moving:
            sigma = math.sqrt(max(sq)) * (1 + 1e-15)
            residual = math.sqrt(2 * math.log(2 * moving)) * sigma
    chain = math.fsum(terms)
    cap = total_constant(plan).total * norm
    return FamilyBound(min(chain + residual, cap), chain, residual, kstar, tuple(terms), cap)


def family_bound(fam: ProcessFamily, plan: ConstantPlan | None = None) -> float:
    """Upper bound on ``EX`` for this family, never above ``total * ||a(1)||``."""
    return family_bound_detail(fam, plan).bound


# --- serialization -------------------------------------------------------------


def sig12(x: float) -> float:
    return float(f"{x:.12g}")


def encode_count(N: int):
    """Counts beyond 2**63 as ``{"mantissa", "exponent"}`` with ``N ~ mantissa * 2**exponent``."""
    if N < 2**63:
        return N
    e = N.bit_length() - 53
    return {"mantissa": sig12((N >> e) / 2.0**53), "exponent": e + 53}


def plan_to_json(plan: ConstantPlan, summary: ConstantTotal | None = None) -> dict:
    summary = summary or total_constant(plan)
    return {
        "label": plan.label,
        "K": plan.K,
        "levels": [
            {"k": lv.k, "C": sig12(lv.C), "p": sig12(lv.p), "N": encode_count(lv.N), "term": sig12(t)}
            for lv, t in zip(plan.levels, summary.terms)
        ],
        "tail_bound": float(f"{summary.tail_bound:.12g}"),
        "tail_log": sig12(summary.tail_log),
        "total": sig12(summary.total),
        "published_constant": PUBLISHED_CONSTANT,
        "paper_claim_met": summary.paper_claim_met,
    }
