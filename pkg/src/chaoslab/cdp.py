"""Convergence-decomposition checkers and counterexample machinery.

For an integrable centered law the decisive quantity at scale ``t`` is

    R(t) = |E X 1{|X| <= 1/t}| / ( (1/t) P(|X| > 1/t) + t Var(X 1{|X| <= 1/t}) ).

The i.i.d. criterion holds when R stays bounded for small ``t``; a law
with unbounded R admits a triangular-array schedule whose weighted sums
converge to 1 in probability while every bounded shift of the summands
fails, which is what :func:`build_iid_counterexample_schedule` constructs.
All checks are over an explicit finite grid of scales and say so.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import distributions as dists
from .distributions import DistributionSpec
from .errors import DomainError, NoScheduleError, ParameterError
from .streams import Stream

__all__ = [
    "CdpVerdict",
    "CounterexampleSchedule",
    "cdp_ratio",
    "default_t_grid",
    "check_iid_cdp",
    "check_anti_concentration",
    "check_sequence_condition",
    "check_median_condition",
    "wlln_conditions",
    "build_iid_counterexample_schedule",
    "schedule_wlln_rows",
    "schedule_bounds_exact",
    "simulate_schedule",
    "simulate_two_point_counterexample",
    "TwoPointPaths",
]

DEFAULT_C_MAX = 1e3
_STRUCTURAL_JITTER = 1e-9  # probe both sides of each atom-inclusion jump


def _is_deterministic_zero(dist: DistributionSpec) -> bool:
    return dist.kind == "deterministic" and dist.params[0] == 0.0


def cdp_ratio(dist: DistributionSpec, t: float) -> float:
    """R(t) as above.  0/0 counts as 0; positive/0 is +inf."""
    if not t > 0.0:
        raise ParameterError("scale t must be positive")
    if _is_deterministic_zero(dist):
        raise DomainError("ratio undefined for the a.s.-zero law")
    u = 1.0 / t
    numerator = abs(dists.truncated_mean(dist, u))
    denominator = u * dists.tail_prob(dist, u) + t * dists.truncated_variance(dist, u)
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / denominator


def default_t_grid(
    dist: DistributionSpec | None = None,
    t_max: float = 1.0,
    t_min: float = 2.0**-40,
    points: int = 64,
) -> np.ndarray:
    """Decreasing grid of scales: geometric from ``t_max`` to ``t_min``
    plus, for discrete laws, a pair of points on either side of each
    atom's reciprocal (where the truncated moments jump)."""
    if not 0.0 < t_min < t_max:
        raise ParameterError("need 0 < t_min < t_max")
    if points < 2:
        raise ParameterError("need at least two grid points")
    values = list(np.geomspace(t_max, t_min, points))
    if dist is not None and dists.is_discrete(dist):
        for v, _ in dists.atoms(dist):
            if v == 0.0:
                continue
            reciprocal = 1.0 / abs(v)
            for factor in (1.0 - _STRUCTURAL_JITTER, 1.0 + _STRUCTURAL_JITTER):
                t = reciprocal * factor
                if t <= t_max:
                    values.append(t)
    grid = np.unique(np.asarray(values, dtype=float))[::-1]
    return grid


@dataclass(frozen=True)
class CdpVerdict:
    """Outcome of a grid check.  ``witness_c`` is the max ratio seen, i.e.
    the smallest constant that would make every grid point pass."""

    holds: bool
    witness_c: float
    violations: tuple[tuple[float, float], ...]
    t_grid: tuple[float, ...]


def _validate_grid(t_grid) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("t_grid must be a nonempty 1-D sequence")
    if not np.all(grid > 0.0):
        raise ParameterError("t_grid entries must be positive")
    return grid


def check_iid_cdp(
    dist: DistributionSpec,
    t_grid=None,
    c_max: float = DEFAULT_C_MAX,
) -> CdpVerdict:
    """Check the i.i.d. criterion over a grid of scales.

    The verdict is about the supplied grid only.  The a.s.-zero law holds
    trivially and is answered without evaluating any ratio.
    """
    if c_max <= 0.0:
        raise ParameterError("c_max must be positive")
    if _is_deterministic_zero(dist):
        grid = () if t_grid is None else tuple(_validate_grid(t_grid).tolist())
        return CdpVerdict(True, 0.0, (), grid)
    grid = default_t_grid(dist) if t_grid is None else _validate_grid(t_grid)
    ratios = [cdp_ratio(dist, float(t)) for t in grid]
    witness = max(ratios) if ratios else 0.0
    violations = tuple(
        (float(t), r) for t, r in zip(grid, ratios) if r > c_max
    )
    return CdpVerdict(not violations, witness, violations, tuple(grid.tolist()))


def check_anti_concentration(dist: DistributionSpec, delta: float) -> bool:
    """True when sup_x P(X in (x - delta, x + delta)) <= 1 - delta.

    Windows slide over the signed values: any law that is not almost
    surely constant passes for small enough delta, which is how the
    condition gets discharged in the i.i.d. reduction.  Exact for
    discrete laws (window scan over atom values); for continuous laws
    the supremum is taken over a grid of centers with spacing delta/8
    and conservatively widened windows, so a True answer is always safe.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta must be in (0, 1)")
    bound = 1.0 - delta
    if dists.is_discrete(dist):
        table: dict[float, float] = {}
        for v, p in dists.atoms(dist):
            table[v] = table.get(v, 0.0) + p
        w = sorted(table)
        masses = [table[v] for v in w]
        best = 0.0
        j = 0
        for i in range(len(w)):
            if j < i:
                j = i
            while j + 1 < len(w) and w[j + 1] - w[i] < 2.0 * delta:
                j += 1
            best = max(best, math.fsum(masses[i : j + 1]))
        return best <= bound
    # continuous: conservative grid scan
    if dist.kind == "gaussian":
        mu, sd = dist.params
        lo, hi = mu - 8.0 * sd, mu + 8.0 * sd
    else:
        hi = dists.support_bound(dist)
        lo = -hi
    step = delta / 8.0
    centers = np.arange(lo - delta, hi + delta + step, step)
    pad = delta / 16.0
    best = 0.0
    for x in centers:
        mass = dists.cdf(dist, x + delta + pad) - dists.cdf(dist, x - delta - pad)
        best = max(best, mass)
    return best <= bound


def check_sequence_condition(
    sequence,
    t_grid=None,
    c_max: float = DEFAULT_C_MAX,
) -> CdpVerdict:
    """Uniform grid check of the centered-truncation bound over a family
    of laws.  A.s.-zero members satisfy the bound trivially and are
    skipped."""
    laws = [d for d in sequence if not _is_deterministic_zero(d)]
    if t_grid is None:
        merged = [default_t_grid(d) for d in laws] or [default_t_grid()]
        grid = np.unique(np.concatenate(merged))[::-1]
    else:
        grid = _validate_grid(t_grid)
    witness = 0.0
    violations = []
    for t in grid:
        worst = max((cdp_ratio(d, float(t)) for d in laws), default=0.0)
        witness = max(witness, worst)
        if worst > c_max:
            violations.append((float(t), worst))
    return CdpVerdict(not violations, witness, tuple(violations), tuple(grid.tolist()))


def median_condition_ratio(dist: DistributionSpec, t: float) -> float:
    """Median-recentred variant of :func:`cdp_ratio`."""
    if not t > 0.0:
        raise ParameterError("scale t must be positive")
    if _is_deterministic_zero(dist):
        raise DomainError("ratio undefined for the a.s.-zero law")
    u = 1.0 / t
    med = dists.median(dist)
    numerator = abs(med + dists.truncated_mean(dist, u, center=med))
    denominator = u * dists.tail_prob(dist, u) + t * dists.truncated_second_moment(
        dist, u, center=med
    )
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return numerator / denominator


def check_median_condition(
    sequence,
    t_grid=None,
    c_max: float = DEFAULT_C_MAX,
) -> CdpVerdict:
    """Grid check of the median-recentred bound over a family of laws."""
    laws = list(sequence)
    if t_grid is None:
        merged = [default_t_grid(d) for d in laws] or [default_t_grid()]
        grid = np.unique(np.concatenate(merged))[::-1]
    else:
        grid = _validate_grid(t_grid)
    witness = 0.0
    violations = []
    for t in grid:
        worst = max((median_condition_ratio(d, float(t)) for d in laws), default=0.0)
        witness = max(witness, worst)
        if worst > c_max:
            violations.append((float(t), worst))
    return CdpVerdict(not violations, witness, tuple(violations), tuple(grid.tolist()))


def wlln_conditions(rows, tau: float = 1.0):
    """Exact triangular-array law-of-large-numbers quantities.

    ``rows``: one row per n, each an iterable of (dist, scaling, count)
    describing ``count`` i.i.d. copies of ``scaling * X``.  Returns a list
    of pairs (A_n, B_n): the truncated-mean total and the tail + truncated
    -variance total at threshold ``tau``.  Row sums converge to 1 in
    probability iff A_n -> 1 and B_n -> 0.
    """
    if not tau > 0.0:
        raise ParameterError("threshold tau must be positive")
    out = []
    for row in rows:
        a_terms = []
        b_terms = []
        for dist, scaling, count in row:
            count = int(count)
            if count < 0:
                raise ParameterError("count must be nonnegative")
            s = float(scaling)
            if s == 0.0 or count == 0:
                continue
            u = tau / abs(s)
            a_terms.append(count * (s * dists.truncated_mean(dist, u)))
            b_terms.append(
                count
                * (dists.tail_prob(dist, u) + s * s * dists.truncated_variance(dist, u))
            )
        out.append((math.fsum(a_terms), math.fsum(b_terms)))
    return out


@dataclass(frozen=True)
class CounterexampleSchedule:
    """Triangular-array schedule: at stage n, ``k_n + 1`` i.i.d. copies of
    the law scaled by ``a_n`` (|a_n| = t_n, sign matching the truncated
    mean)."""

    dist: DistributionSpec
    ns: tuple[int, ...]
    t_values: tuple[float, ...]
    a_values: tuple[float, ...]
    k_values: tuple[int, ...]

    def __post_init__(self) -> None:
        m = len(self.ns)
        if not (len(self.t_values) == len(self.a_values) == len(self.k_values) == m):
            raise ParameterError("schedule components must have equal length")
        if any(not t > 0.0 for t in self.t_values):
            raise ParameterError("scales must be positive")
        if any(k < 1 for k in self.k_values):
            raise ParameterError("stage sizes must be at least 1")

    def stage(self, n: int) -> tuple[float, float, int]:
        i = self.ns.index(n)
        return self.t_values[i], self.a_values[i], self.k_values[i]


def build_iid_counterexample_schedule(
    dist: DistributionSpec,
    n_lo: int,
    n_hi: int,
    candidate_grid=None,
) -> CounterexampleSchedule:
    """Construct the witness schedule for a law violating the criterion.

    For each n the scale t_n is the largest remaining candidate with
    R(t_n) > n; then a_n = sign(E X 1{|X| <= 1/t_n}) * t_n and
    k_n = floor(1/(t_n |E X 1{|X| <= 1/t_n}|)) - 1.  Raises
    :class:`NoScheduleError` when no candidate violates at level n, which
    is the expected outcome for laws satisfying the criterion.
    """
    if n_lo < 1 or n_hi < n_lo:
        raise ParameterError("need 1 <= n_lo <= n_hi")
    if candidate_grid is None:
        grid = default_t_grid(dist)
    else:
        grid = _validate_grid(candidate_grid)
    grid = np.sort(np.unique(grid))[::-1]  # decreasing
    ns, t_sel, a_sel, k_sel = [], [], [], []
    pos = 0
    for n in range(n_lo, n_hi + 1):
        chosen = None
        while pos < grid.size:
            t = float(grid[pos])
            pos += 1
            if cdp_ratio(dist, t) > n:
                chosen = t
                break
        if chosen is None:
            raise NoScheduleError(
                f"no scale with ratio above {n}: the law appears to satisfy "
                "the criterion on the candidate grid"
            )
        trunc = dists.truncated_mean(dist, 1.0 / chosen)
        if trunc == 0.0:
            raise NoScheduleError(f"degenerate truncated mean at t={chosen}")
        # Exact rational floor: at large stages t|E| is far below the ulp
        # of 1, so float flooring would overshoot the (1 - t|E|, 1] window.
        magnitude = Fraction(chosen) * abs(Fraction(trunc))
        k_n = int(1 / magnitude) - 1
        if k_n < 1:
            raise NoScheduleError(f"stage size collapsed at t={chosen}")
        ns.append(n)
        t_sel.append(chosen)
        a_sel.append(math.copysign(chosen, trunc) if trunc != 0.0 else chosen)
        k_sel.append(k_n)
    return CounterexampleSchedule(dist, tuple(ns), tuple(t_sel), tuple(a_sel), tuple(k_sel))


def schedule_wlln_rows(schedule: CounterexampleSchedule):
    """Rows for :func:`wlln_conditions`: stage n has k_n + 1 copies of
    a_n * X."""
    return [
        [(schedule.dist, a, k + 1)]
        for a, k in zip(schedule.a_values, schedule.k_values)
    ]


def schedule_bounds_exact(schedule: CounterexampleSchedule):
    """Per-stage (A_n, B_n) in exact rational arithmetic.

    At large stages k_n + 1 is of order 1/(t_n |E|) with t_n |E| far below
    the ulp of 1, so A_n - 1 is invisible to floats; Fractions keep the
    window (1 - t_n |E|, 1] testable.  Inputs are the double-precision
    moment queries, treated as exact binary rationals.
    """
    out = []
    for t, a, k in zip(schedule.t_values, schedule.a_values, schedule.k_values):
        u = 1.0 / abs(a)
        tm = dists.truncated_mean(schedule.dist, u)
        tail = dists.tail_prob(schedule.dist, u)
        var = dists.truncated_variance(schedule.dist, u)
        count = k + 1
        a_exact = count * Fraction(a) * Fraction(tm)
        b_exact = count * (Fraction(tail) + Fraction(a) ** 2 * Fraction(var))
        out.append((a_exact, b_exact))
    return out


_SIMULATION_CAP = 100_000_000


def simulate_schedule(
    schedule: CounterexampleSchedule,
    n: int,
    paths: int,
    stream: Stream,
    eps_levels=(0.05, 0.1, 0.2),
):
    """Monte Carlo law of the stage-n sum S_n = sum of (k_n+1) copies of
    a_n X.

    Returns a dict with the per-epsilon exceedance estimates
    P(|S_n - 1| > eps), their binomial standard errors, and the sample
    mean/variance of S_n.  Discrete laws are simulated exactly through
    multinomial atom counts, so cost does not grow with k_n.
    """
    if paths < 0:
        raise ParameterError("paths must be nonnegative")
    t_n, a_n, k_n = schedule.stage(n)
    if paths == 0:
        return {
            "n": n,
            "k_n": k_n,
            "t_n": t_n,
            "a_n": a_n,
            "paths": 0,
            "mean": math.nan,
            "variance": math.nan,
            "exceedance": {},
            "standard_error": {},
        }
    copies = k_n + 1
    gen = stream.child("schedule", n).generator()
    if dists.is_discrete(schedule.dist):
        values, probs = np.array(dists.atoms(schedule.dist)).T
        counts = gen.multinomial(copies, probs, size=paths)
        sums = a_n * (counts @ values)
    else:
        if copies * paths > _SIMULATION_CAP:
            raise ParameterError("simulation request exceeds the sampling cap")
        draws = gen.standard_normal((paths, copies)) if schedule.dist.kind == "gaussian" else None
        if draws is None:
            raise ParameterError("continuous schedule simulation supports gaussian only")
        mu, sd = schedule.dist.params
        sums = a_n * (mu * copies + sd * draws.sum(axis=1))
    result = {
        "n": n,
        "k_n": k_n,
        "t_n": t_n,
        "a_n": a_n,
        "paths": paths,
        "mean": float(np.mean(sums)),
        "variance": float(np.var(sums)),
        "exceedance": {},
        "standard_error": {},
    }
    for eps in eps_levels:
        hit = float(np.mean(np.abs(sums - 1.0) > eps))
        result["exceedance"][eps] = hit
        result["standard_error"][eps] = math.sqrt(max(hit * (1.0 - hit), 1.0 / paths) / paths)
    return result


@dataclass(frozen=True)
class TwoPointPaths:
    """Simulated two-point counterexample ensemble.

    ``full`` holds Z_n = 1 + Z_{n,1} per (path, n); ``linear`` holds the
    degree-one summand Z_{n,1}.  Stage n uses the two-point law with
    parameter p_n; at its frequent atom Z_{n,1} is exactly -1 and Z_n
    exactly 0.
    """

    p_values: tuple[float, ...]
    full: np.ndarray
    linear: np.ndarray

    @property
    def n_max(self) -> int:
        return self.full.shape[1]

    def hit_probability(self, n: int) -> float:
        """Empirical P(Z_{n,1} = -1)."""
        return float(np.mean(self.linear[:, n - 1] == -1.0))

    def stabilization_indices(self) -> np.ndarray:
        """Per path: smallest m with Z_l = 0 for every l in [m, n_max]."""
        nonzero = self.full != 0.0
        last = np.zeros(self.full.shape[0], dtype=int)
        for j in range(self.n_max):
            last[nonzero[:, j]] = j + 1
        return last + 1


def simulate_two_point_counterexample(
    p_fn,
    n_max: int,
    paths: int,
    stream: Stream,
) -> TwoPointPaths:
    """Simulate Z_n = 1 - c_n X_{(n)} with X_(n) two-point(p_n) and
    c_n = sqrt(p_n (1-p_n)) / (1-p_n), independently across n.

    At the frequent atom the cancellation is applied algebraically, so
    Z_n is exactly 0 there.  When sum(1 - p_n) < inf the paths stabilize
    at Z = 0 by Borel-Cantelli.
    """
    if n_max < 1 or paths < 1:
        raise ParameterError("need n_max >= 1 and paths >= 1")
    p_values = []
    full = np.empty((paths, n_max))
    linear = np.empty((paths, n_max))
    for n in range(1, n_max + 1):
        p = float(p_fn(n))
        if not 0.0 < p < 1.0:
            raise ParameterError(f"p_fn({n}) = {p} is outside (0, 1)")
        p_values.append(p)
        gen = stream.child("two-point", n).generator()
        frequent = gen.random(paths) < p
        rare_value = p / (1.0 - p)  # Z_{n,1} at the rare atom
        linear[:, n - 1] = np.where(frequent, -1.0, rare_value)
        full[:, n - 1] = np.where(frequent, 0.0, 1.0 + rare_value)
    return TwoPointPaths(tuple(p_values), full, linear)
