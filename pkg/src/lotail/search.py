"""Local search for admissible families with a large ratio ``P(X >= c) / P(Y >= 1)``.

Every candidate is projected onto the admissible set (pointwise sort, then
the minimal rescaling that restores the mass condition) and scored with the
exact oracle, so reported ratios are exact. The search can only exhibit lower
bounds on the best attainable ratio.

Perturbation kernel, one of (uniformly):

* redraw one coefficient ``a_i(t_j)`` uniformly between its neighbours in time;
* shift one jump of one function a column earlier or later;
* multiply one function from a random column on by ``exp(N(0, 0.3))``;
* shrink everything by ``exp(-|N(0, 0.1)|)``, letting the projection pull the
  family back onto the mass boundary.

Restarts run independently (seeds spawned from the master seed) and are
reduced by ``(ratio, family digest)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InfeasibleDimension, InvalidParams
from .family import ProcessFamily, admissibility_check, gen_family, project_admissible
from .oracle import enumerate_distributions

DEFAULT_RESTARTS = 4


def exact_ratio(fam: ProcessFamily, c: float = 1.0) -> Fraction | None:
    dx, dy = enumerate_distributions(fam.coefficients, mode="exact")
    py = dy.prob_ge(1)
    if py == 0:
        return None
    return dx.prob_ge(c) / py


@dataclass
class SearchState:
    incumbent: ProcessFamily
    ratio: float
    c: float
    budget: int
    seed: int
    evaluations: int = 0
    trace: list[float] = field(default_factory=list)
    ratio_exact: Fraction | None = None

    def to_json(self, verbose: bool = False) -> dict:
        out = {
            "n": self.incumbent.n,
            "c": self.c,
            "ratio": self.ratio,
            "ratio_exact": None if self.ratio_exact is None else str(self.ratio_exact),
            "budget": self.budget,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "digest": self.incumbent.digest(),
            "family": self.incumbent.to_json(),
        }
        if verbose:
            out["trace"] = self.trace
        return out


def _perturb(times, A: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    A = A.copy()
    n, M = A.shape
    move = rng.integers(4)
    i = int(rng.integers(n))
    if move == 0:
        j = int(rng.integers(M))
        lo = A[i, j - 1] if j > 0 else 0.0
        hi = A[i, j + 1] if j + 1 < M else A[i, j] * 1.5 + 0.1
        A[i, j] = rng.uniform(lo, hi)
    elif move == 1 and M > 1:
        j = int(rng.integers(1, M))
        if rng.random() < 0.5:
            A[i, j] = A[i, j - 1]
        else:
            A[i, j - 1] = A[i, j]
    elif move == 2:
        j = int(rng.integers(M))
        A[i, j:] *= math.exp(rng.normal(0.0, 0.3))
        A[i] = np.maximum.accumulate(A[i])
    else:
        A *= math.exp(-abs(rng.normal(0.0, 0.1)))
    return A


def _run_restart(n: int, c: float, budget: int, seed_seq, initial: ProcessFamily | None):
    rng = np.random.default_rng(seed_seq)
    if initial is None:
        seed = int(seed_seq.generate_state(1, np.uint64)[0])
        current = gen_family("szatzschneider", n, seed)
    else:
        current = initial
    cur_ratio = exact_ratio(current, c)
    best, best_ratio = current, cur_ratio
    trace = []
    for _ in range(budget):
        cand_A = _perturb(current.times, current.coefficients, rng)
        cand = project_admissible(current.times, cand_A)
        if cand is not None:
            r = exact_ratio(cand, c)
            if r is not None and (cur_ratio is None or r >= cur_ratio):
                current, cur_ratio = cand, r
                if best_ratio is None or r > best_ratio:
                    best, best_ratio = cand, r
        trace.append(float(best_ratio) if best_ratio is not None else 0.0)
    return best, best_ratio, trace


def search_ratio(
    n: int,
    c: float = 1.0,
    budget: int = 1000,
    seed: int = 0,
    initial: ProcessFamily | None = None,
    restarts: int = DEFAULT_RESTARTS,
    workers: int = 1,
) -> SearchState:
    """Best ratio found within ``budget`` candidate evaluations (shared across restarts)."""
    if n < 3:
        raise InfeasibleDimension("the admissible set is empty for n < 3")
    if budget < 0:
        raise InvalidParams("budget must be >= 0")
    if initial is not None:
        if initial.n != n:
            raise InvalidParams("initial family has the wrong dimension")
        if not admissibility_check(initial).admissible:
            raise InvalidParams("initial family is not admissible")
        restarts = 1
    restarts = max(1, min(restarts, budget)) if budget else 1
    shares = [budget // restarts + (1 if r < budget % restarts else 0) for r in range(restarts)]
    seqs = np.random.SeedSequence(seed).spawn(restarts)
    jobs = [(n, c, shares[r], seqs[r], initial) for r in range(restarts)]
    if workers > 1 and restarts > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_restart, *zip(*jobs)))
    else:
        outs = [_run_restart(*job) for job in jobs]

    trace = []
    running = -math.inf
    for _, _, tr in outs:
        for x in tr:
            running = max(running, x)
            trace.append(running)
    scored = [(r if r is not None else Fraction(-1), fam.digest(), fam) for fam, r, _ in outs]
    # highest ratio wins; among equal ratios the lexicographically smallest digest
    ratio, _, fam = min(scored, key=lambda s: (-s[0], s[1]))
    return SearchState(
        incumbent=fam,
        ratio=float(ratio),
        c=c,
        budget=budget,
        seed=seed,
        evaluations=budget,
        trace=trace,
        ratio_exact=ratio,
    )


def sharpness_table(ns, c: float = 1.0, budget: int = 1000, seed: int = 0, workers: int = 1) -> list[dict]:
    rows = []
    for n in ns:
        if n < 3:
            raise InfeasibleDimension(f"n={n}: the admissible set is empty for n < 3")
    for n in ns:
        st = search_ratio(n, c, budget, seed, workers=workers)
        rows.append(
            {
                "n": n,
                "best_ratio": st.ratio,
                "best_ratio_exact": str(st.ratio_exact),
                "family_digest": st.incumbent.digest(),
                "counterexample_candidate": bool(n >= 5 and st.ratio > 2),
            }
        )
    return rows
