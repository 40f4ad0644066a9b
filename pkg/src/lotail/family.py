"""Monotone right-continuous step functions and the families built from them.

A family ``a = (a_1, ..., a_n)`` defines the Bernoulli process
``t -> sum_i a_i(t) * eps_i`` on ``[0, 1]``. Because every ``a_i`` is a step
function, the supremum over ``[0, 1]`` is a maximum over the finitely many
merged breakpoint times, which is what makes exact enumeration possible.
"""

from __future__ import annotations

import bisect
import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InvalidParams,
    MissingTimeZero,
    NegativeValue,
    NonMonotoneValues,
    NotDyadic,
    TimeOutOfRange,
    UnsortedTimes,
)

# Exact mode stores every coefficient as an integer multiple of 2**-SCALE_BITS.
SCALE_BITS = 20
SCALE = 1 << SCALE_BITS

# Grids used by the random generators; both are finer than SCALE so that
# generated families are always usable in exact mode.
VALUE_GRID_BITS = 16
TIME_GRID = 1024
MAX_BREAKPOINTS = 8


@dataclass(frozen=True)
class StepFunction:
    times: tuple[float, ...]
    values: tuple[float, ...]

    def __call__(self, t: float) -> float:
        return eval_at(self, t)

    @property
    def terminal(self) -> float:
        return self.values[-1]

    def to_points(self) -> list[dict]:
        return [{"t": t, "v": v} for t, v in zip(self.times, self.values)]


def make_step(points: Iterable[Sequence[float]]) -> StepFunction:
    """Validate ``[(time, value), ...]`` and build a :class:`StepFunction`."""
    pts = [(float(t), float(v)) for t, v in points]
    if not pts:
        raise MissingTimeZero("a step function needs a breakpoint at time 0")
    times = [t for t, _ in pts]
    values = [v for _, v in pts]
    for t in times:
        if not 0.0 <= t <= 1.0:
            raise TimeOutOfRange(f"breakpoint time {t} outside [0, 1]")
    if times[0] != 0.0:
        raise MissingTimeZero(f"first breakpoint at {times[0]}, expected 0")
    for a, b in zip(times, times[1:]):
        if not a < b:
            raise UnsortedTimes(f"breakpoint times not strictly increasing: {a} then {b}")
    for v in values:
        if v < 0.0 or v != v:
            raise NegativeValue(f"value {v} is negative or NaN")
    for a, b in zip(values, values[1:]):
        if b < a:
            raise NonMonotoneValues(f"value decreases from {a} to {b}")
    return StepFunction(tuple(times), tuple(values))


def eval_at(f: StepFunction, t: float) -> float:
    """Right-continuous lookup: the value of the last breakpoint at or before ``t``."""
    if not 0.0 <= t <= 1.0:
        raise TimeOutOfRange(f"time {t} outside [0, 1]")
    return f.values[bisect.bisect_right(f.times, t) - 1]


def constant(value: float) -> StepFunction:
    return make_step([(0.0, value)])


def indicator(weight: float, jump: float) -> StepFunction:
    """``weight * 1_{[jump, 1]}``."""
    if jump == 0.0:
        return make_step([(0.0, weight)])
    return make_step([(0.0, 0.0), (jump, weight)])


@dataclass(frozen=True)
class ProcessFamily:
    functions: tuple[StepFunction, ...]

    def __post_init__(self):
        if len(self.functions) < 1:
            raise InvalidParams("a family needs at least one function")

    @property
    def n(self) -> int:
        return len(self.functions)

    @cached_property
    def times(self) -> tuple[float, ...]:
        return tuple(merged_times(self))

    @cached_property
    def coefficients(self) -> np.ndarray:
        """``(n, M)`` array with ``a_i`` evaluated at each merged time."""
        out = np.empty((self.n, len(self.times)))
        for i, f in enumerate(self.functions):
            idx = np.searchsorted(f.times, self.times, side="right") - 1
            out[i] = np.asarray(f.values)[idx]
        out.setflags(write=False)
        return out

    @property
    def terminal(self) -> np.ndarray:
        return self.coefficients[:, -1]

    @cached_property
    def variance_exact(self) -> tuple[Fraction, ...]:
        """``V(t) = sum_i a_i(t)**2`` at every merged time, as exact rationals."""
        cols = self.coefficients.T
        return tuple(sum((Fraction(float(v)) ** 2 for v in col), Fraction(0)) for col in cols)

    @property
    def variance(self) -> np.ndarray:
        return np.array([float(v) for v in self.variance_exact])

    @property
    def terminal_norm(self) -> float:
        return float(np.sqrt(float(self.variance_exact[-1])))

    def is_dyadic(self) -> bool:
        try:
            to_fixed(self.coefficients)
        except NotDyadic:
            return False
        return True

    def to_json(self) -> dict:
        return {"n": self.n, "functions": [f.to_points() for f in self.functions]}

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def make_family(functions: Iterable[StepFunction]) -> ProcessFamily:
    return ProcessFamily(tuple(functions))


def constant_family(weights: Sequence[float]) -> ProcessFamily:
    """The degenerate family ``a_i == w_i``, for which ``X == Y``."""
    return make_family(constant(float(w)) for w in weights)


def merged_times(fam: ProcessFamily) -> list[float]:
    ts = {0.0, 1.0}
    for f in fam.functions:
        ts.update(f.times)
    return sorted(ts)


def to_fixed(values, bits: int = SCALE_BITS) -> np.ndarray:
    """Scale by ``2**bits`` into int64, refusing anything non-dyadic."""
    arr = np.asarray(values, dtype=float)
    scaled = arr * float(1 << bits)
    if not np.all(np.isfinite(scaled)) or np.any(np.abs(scaled) >= 2.0**62):
        raise NotDyadic("values too large for fixed-point exact mode")
    if not np.all(scaled == np.round(scaled)):
        raise NotDyadic(f"values are not multiples of 2**-{bits}")
    return scaled.astype(np.int64)


# --- serialization ---------------------------------------------------------


def family_from_json(data: dict) -> ProcessFamily:
    try:
        fns = data["functions"]
        n = int(data["n"])
    except (KeyError, TypeError) as exc:
        raise InvalidParams(f"malformed family document: {exc}") from None
    if len(fns) != n:
        raise InvalidParams(f"declared n={n} but {len(fns)} functions given")
    return make_family(make_step((p["t"], p["v"]) for p in pts) for pts in fns)


def load_family(path) -> ProcessFamily:
    with open(path) as fh:
        return family_from_json(json.load(fh))


def dump_family(fam: ProcessFamily, path) -> None:
    with open(path, "w") as fh:
        json.dump(fam.to_json(), fh, indent=1)


# --- admissibility ---------------------------------------------------------


@dataclass(frozen=True)
class Admissibility:
    monotone: bool
    right_continuous: bool
    ordering: bool
    mass: bool
    ordering_slack: float
    mass_slack: float

    @property
    def admissible(self) -> bool:
        return self.monotone and self.right_continuous and self.ordering and self.mass


def admissibility_check(fam: ProcessFamily) -> Admissibility:
    """Pointwise ordering ``a_1 >= ... >= a_n`` and mass ``sum a_i(1) >= 1 + 2 a_1(1)``.

    Monotonicity and right-continuity hold by construction for validated step
    functions; they are reported for completeness.
    """
    A = fam.coefficients
    if fam.n > 1:
        gaps = A[:-1] - A[1:]
        ordering_slack = float(gaps.min())
    else:
        ordering_slack = 0.0
    term = [Fraction(float(v)) for v in fam.terminal]
    mass_slack = sum(term, Fraction(0)) - 1 - 2 * term[0]
    monotone = bool(np.all(np.diff(A, axis=1) >= 0)) and bool(np.all(A >= 0))
    return Admissibility(
        monotone=monotone,
        right_continuous=True,
        ordering=ordering_slack >= 0,
        mass=mass_slack >= 0,
        ordering_slack=ordering_slack,
        mass_slack=float(mass_slack),
    )


def is_ordered_alpha(fam: ProcessFamily) -> bool:
    """True if ``a_i(t) = alpha_i(t) a_i(1)`` with ``1 >= alpha_1 >= ... >= alpha_n >= 0``."""
    A = fam.coefficients
    term = A[:, -1]
    # alpha_i <= 1 is automatic for nondecreasing a_i
    # compare alpha_i >= alpha_{i+1} without dividing: a_i * w_{i+1} >= a_{i+1} * w_i
    lhs = A[:-1] * term[1:, None]
    rhs = A[1:] * term[:-1, None]
    return bool(np.all(lhs >= rhs))


# --- generators ------------------------------------------------------------

KINDS = ("ordered_alpha", "indicator", "random", "szatzschneider")


def gen_family(kind: str, n: int, seed: int, params: dict | None = None) -> ProcessFamily:
    """Generate a family of the requested class; a pure function of its arguments.

    ``random`` draws, per function, a breakpoint count uniform in ``[1, 8]``,
    jump times uniform on a ``1/1024`` grid, and increments uniform in
    ``(0, 1]`` on a ``2**-16`` grid (the value at time 0 is zero half the time).
    ``params["normalize"]`` rescales to unit terminal norm, which leaves the
    dyadic grid and so only suits float mode.
    """
    params = dict(params or {})
    if n < 1:
        raise InvalidParams("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), KINDS.index(kind) if kind in KINDS else 99, n]))
    if kind == "random":
        fam = _gen_random(n, rng, params)
    elif kind == "indicator":
        fam = _gen_indicator(n, rng, params)
    elif kind == "ordered_alpha":
        fam = _gen_ordered_alpha(n, rng, params)
    elif kind == "szatzschneider":
        if n < 3:
            raise InvalidParams("conditions 1 and 2 need n >= 3")
        fam = _gen_szatzschneider(n, rng, params)
    else:
        raise InvalidParams(f"unknown family kind {kind!r}")
    if params.get("normalize"):
        norm = fam.terminal_norm
        if norm > 0:
            fam = make_family(
                StepFunction(f.times, tuple(v / norm for v in f.values)) for f in fam.functions
            )
    return fam


def _grid_value(rng, size=None):
    # uniform on (0, 1] restricted to multiples of 2**-16
    k = rng.integers(1, (1 << VALUE_GRID_BITS) + 1, size=size)
    return k / float(1 << VALUE_GRID_BITS)


def _random_times(rng, count: int) -> list[float]:
    picks = rng.choice(np.arange(1, TIME_GRID), size=count, replace=False)
    return sorted(float(k) / TIME_GRID for k in picks)


def _random_step(rng, m_max: int = MAX_BREAKPOINTS) -> StepFunction:
    m = int(rng.integers(1, m_max + 1))
    times = [0.0] + _random_times(rng, m - 1)
    start = 0.0 if rng.random() < 0.5 else float(_grid_value(rng))
    incs = _grid_value(rng, size=m - 1)
    values = [start]
    for inc in incs:
        values.append(values[-1] + float(inc))
    return make_step(zip(times, values))


def _gen_random(n, rng, params):
    m_max = int(params.get("m_max", MAX_BREAKPOINTS))
    if m_max < 1:
        raise InvalidParams("m_max must be >= 1")
    return make_family(_random_step(rng, m_max) for _ in range(n))


def _gen_indicator(n, rng, params):
    weights = params.get("weights")
    jumps = params.get("jumps")
    if weights is None:
        weights = list(_grid_value(rng, size=n))
    if jumps is None:
        jumps = sorted(float(k) / TIME_GRID for k in rng.integers(0, TIME_GRID, size=n))
    if len(weights) != n or len(jumps) != n:
        raise InvalidParams("weights and jumps must both have length n")
    if any(b < a for a, b in zip(jumps, jumps[1:])):
        raise InvalidParams("jump times must be nondecreasing")
    return make_family(indicator(float(w), float(s)) for w, s in zip(weights, jumps))


def _gen_ordered_alpha(n, rng, params):
    # Random nondecreasing profiles ending at 1, then sorted pointwise so the
    # i-th largest profile becomes alpha_i; order statistics of monotone
    # vectors stay monotone in t.
    grid_bits = 8
    steps = [_random_step(rng) for _ in range(n)]
    profiles = []
    for f in steps:
        top = f.values[-1]
        if top == 0.0:
            profiles.append(constant(1.0))
            continue
        vals = [np.ceil(v / top * (1 << grid_bits)) / (1 << grid_bits) for v in f.values]
        vals[-1] = 1.0
        profiles.append(make_step(zip(f.times, vals)))
    alpha_fam = make_family(profiles)
    alpha = -np.sort(-alpha_fam.coefficients, axis=0)
    weights = params.get("weights")
    if weights is None:
        weights = np.ceil(_grid_value(rng, size=n) * (1 << grid_bits)) / (1 << grid_bits)
    weights = np.asarray(weights, dtype=float)
    if len(weights) != n or np.any(weights < 0):
        raise InvalidParams("weights must be n nonnegative numbers")
    return _family_from_matrix(alpha_fam.times, alpha * weights[:, None])


def _family_from_matrix(times: Sequence[float], A: np.ndarray) -> ProcessFamily:
    """Build step functions from values on a common time grid, dropping repeats."""
    fns = []
    for row in A:
        pts = [(times[0], float(row[0]))]
        for t, v in zip(times[1:], row[1:]):
            if v != pts[-1][1]:
                pts.append((t, float(v)))
        fns.append(make_step(pts))
    return make_family(fns)


def project_admissible(times: Sequence[float], A: np.ndarray) -> ProcessFamily | None:
    """Map a monotone coefficient matrix onto the admissible set.

    Values are sorted pointwise (restores the ordering condition while keeping
    each row monotone), then every value is scaled by the smallest factor that
    restores the mass condition and rounded up onto the ``2**-16`` grid.
    Returns ``None`` when no rescaling helps, i.e. ``a_1(1)`` already carries at
    least half of the terminal mass.
    """
    A = -np.sort(-np.asarray(A, dtype=float), axis=0)
    q = float(1 << VALUE_GRID_BITS)
    A = np.ceil(A * q) / q
    term = A[:, -1]
    spare = term.sum() - 2 * term[0]
    if spare <= 0:
        return None
    scale = max(1.0, 1.0 / spare)
    for _ in range(64):
        B = np.ceil(A * scale * q) / q
        t = B[:, -1]
        if Fraction(float(t.sum())) - 1 - 2 * Fraction(float(t[0])) >= 0:
            return _family_from_matrix(times, B)
        scale *= 1.0 + 2.0**-12
    return None


def _gen_szatzschneider(n, rng, params):
    value = params.get("value")
    if value is not None:
        jumps = params.get("jumps")
        if jumps is None:
            jumps = sorted(float(k) / TIME_GRID for k in rng.integers(0, TIME_GRID, size=n))
        fam = _gen_indicator(n, rng, {"weights": [float(value)] * n, "jumps": jumps})
        if not admissibility_check(fam).admissible:
            raise InvalidParams(f"equal value {value} violates the mass condition for n={n}")
        return fam
    m_max = int(params.get("m_max", MAX_BREAKPOINTS))
    for _ in range(1000):
        base = make_family(_random_step(rng, m_max) for _ in range(n))
        fam = project_admissible(base.times, base.coefficients)
        if fam is not None:
            return fam
    raise InvalidParams("could not draw an admissible family")
