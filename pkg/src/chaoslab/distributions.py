"""Input laws and their exact truncated-moment queries.

A :class:`DistributionSpec` is an immutable description of a scalar law.
Discrete kinds answer every moment query by exact atom summation
(``math.fsum``); the two continuous kinds use closed forms, with adaptive
quadrature kept as an independent cross-check route in the test suite.

Truncation conventions, used consistently everywhere: the retained part
is ``X·1{|X - center| <= u}`` and the tail event is ``{|X| > u}`` with
strict inequality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from .errors import ParameterError
from .streams import Stream

__all__ = [
    "DistributionSpec",
    "finite_discrete",
    "gaussian",
    "uniform",
    "rademacher",
    "two_point",
    "heavy_tailed_example",
    "deterministic",
    "is_discrete",
    "atoms",
    "mean",
    "variance",
    "second_moment",
    "support_bound",
    "cdf",
    "quantile",
    "median",
    "tail_prob",
    "truncated_mean",
    "truncated_second_moment",
    "truncated_variance",
    "variance_half_threshold",
    "sample",
    "to_record",
    "from_record",
]

_DISCRETE_KINDS = frozenset(
    {"finite-discrete", "rademacher", "two-point", "heavy-tailed-example", "deterministic"}
)
_CONTINUOUS_KINDS = frozenset({"gaussian", "uniform"})
_PROB_TOL = 1e-12  # finite-discrete masses must sum to 1 within this


@dataclass(frozen=True)
class DistributionSpec:
    """Immutable description of a scalar input law.

    ``params`` is kind-specific and positional; use the factory functions
    below rather than constructing instances directly.
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _DISCRETE_KINDS | _CONTINUOUS_KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")


def finite_discrete(atom_pairs) -> DistributionSpec:
    """Law placing mass p_i at value v_i.  ``atom_pairs``: iterable of (v, p)."""
    flat: list[float] = []
    total = []
    for v, p in atom_pairs:
        v, p = float(v), float(p)
        if not p > 0.0:
            raise ParameterError("atom probabilities must be positive")
        if not math.isfinite(v):
            raise ParameterError("atom values must be finite")
        flat.extend((v, p))
        total.append(p)
    if not flat:
        raise ParameterError("finite-discrete law needs at least one atom")
    if abs(math.fsum(total) - 1.0) > _PROB_TOL:
        raise ParameterError("atom probabilities must sum to 1")
    return DistributionSpec("finite-discrete", tuple(flat))


def gaussian(mean: float, sd: float) -> DistributionSpec:
    if not sd > 0.0:
        raise ParameterError("gaussian sd must be positive")
    return DistributionSpec("gaussian", (float(mean), float(sd)))


def uniform(a: float, b: float) -> DistributionSpec:
    if not a < b:
        raise ParameterError("uniform requires a < b")
    return DistributionSpec("uniform", (float(a), float(b)))


def rademacher() -> DistributionSpec:
    """Symmetric signs: +1 or -1 with probability 1/2 each."""
    return DistributionSpec("rademacher")


def two_point(p: float) -> DistributionSpec:
    """Centered unit-variance law on two atoms.

    Takes the value (1-p)/sqrt(p(1-p)) with probability p and
    -p/sqrt(p(1-p)) with probability 1-p.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ParameterError("two-point parameter must lie in (0, 1)")
    return DistributionSpec("two-point", (p,))


def heavy_tailed_example(n_max: int = 200) -> DistributionSpec:
    """Centered heavy-tailed law with mass 2^-(n+1) at 2^n/n^2.

    The infinite ladder is truncated at level ``n_max``; the residual mass
    2^-(n_max+1) is lumped into a single sentinel atom whose value is the
    conditional mean of the removed tail, so the full law keeps mean
    exactly zero.  A further atom at -pi^2/6 carries probability 1/2.
    """
    n_max = int(n_max)
    # n_max beyond ~500 drives the sentinel's squared value past float range
    if not 1 <= n_max <= 500:
        raise ParameterError("heavy-tailed-example level must be in 1..500")
    return DistributionSpec("heavy-tailed-example", (float(n_max),))


def deterministic(c: float) -> DistributionSpec:
    """Point mass at ``c``."""
    c = float(c)
    if not math.isfinite(c):
        raise ParameterError("deterministic value must be finite")
    return DistributionSpec("deterministic", (c,))


def is_discrete(dist: DistributionSpec) -> bool:
    return dist.kind in _DISCRETE_KINDS


@lru_cache(maxsize=256)
def _atom_table(dist: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    """(values, probs) arrays for a discrete law, in canonical order."""
    kind = dist.kind
    if kind == "finite-discrete":
        flat = dist.params
        values = np.array(flat[0::2], dtype=float)
        probs = np.array(flat[1::2], dtype=float)
    elif kind == "rademacher":
        values = np.array([-1.0, 1.0])
        probs = np.array([0.5, 0.5])
    elif kind == "two-point":
        p = dist.params[0]
        s = math.sqrt(p * (1.0 - p))
        values = np.array([(1.0 - p) / s, -p / s])
        probs = np.array([p, 1.0 - p])
    elif kind == "deterministic":
        values = np.array([dist.params[0]])
        probs = np.array([1.0])
    elif kind == "heavy-tailed-example":
        n_max = int(dist.params[0])
        ns = np.arange(1, n_max + 1, dtype=float)
        values = np.concatenate((2.0**ns / ns**2, [-math.pi**2 / 6.0]))
        probs = np.concatenate((0.5 ** (ns + 1), [0.5]))
        # Sentinel carries the removed tail's mass at whatever value
        # centers the stored (float-rounded) law; in real arithmetic this
        # is 2^n_max * sum_{k>n_max} 1/k^2.  Solving against the rounded
        # atoms in rationals leaves |E X| below 2^-62, the closest a
        # single float atom can get.
        total = sum(
            Fraction(v) * Fraction(p) for v, p in zip(values.tolist(), probs.tolist())
        )
        sentinel = float(-total * 2 ** (n_max + 1))
        values = np.concatenate((values, [sentinel]))
        probs = np.concatenate((probs, [0.5 ** (n_max + 1)]))
    else:
        raise ParameterError(f"{kind} is not a discrete kind")
    return values, probs


def atoms(dist: DistributionSpec) -> tuple[tuple[float, float], ...]:
    """Atom list (value, prob) for discrete kinds."""
    values, probs = _atom_table(dist)
    return tuple(zip(values.tolist(), probs.tolist()))


def mean(dist: DistributionSpec) -> float:
    kind = dist.kind
    if kind in ("rademacher", "two-point", "heavy-tailed-example"):
        return 0.0  # centered by construction
    if kind == "deterministic":
        return dist.params[0]
    if kind == "gaussian":
        return dist.params[0]
    if kind == "uniform":
        a, b = dist.params
        return 0.5 * (a + b)
    values, probs = _atom_table(dist)
    return math.fsum(values * probs)


def second_moment(dist: DistributionSpec) -> float:
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        return mu * mu + sd * sd
    if kind == "uniform":
        a, b = dist.params
        return (a * a + a * b + b * b) / 3.0
    values, probs = _atom_table(dist)
    return math.fsum(values * values * probs)


def variance(dist: DistributionSpec) -> float:
    if dist.kind in ("rademacher", "two-point"):
        return 1.0  # unit variance by construction
    m = mean(dist)
    return second_moment(dist) - m * m


def support_bound(dist: DistributionSpec) -> float:
    """Essential supremum of |X| (inf for gaussian)."""
    if dist.kind == "gaussian":
        return math.inf
    if dist.kind == "uniform":
        a, b = dist.params
        return max(abs(a), abs(b))
    values, _ = _atom_table(dist)
    return float(np.max(np.abs(values)))


def cdf(dist: DistributionSpec, x: float) -> float:
    """P(X <= x)."""
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        return float(norm.cdf((x - mu) / sd))
    if kind == "uniform":
        a, b = dist.params
        if x < a:
            return 0.0
        if x >= b:
            return 1.0
        return (x - a) / (b - a)
    values, probs = _atom_table(dist)
    return math.fsum(probs[values <= x])


def quantile(dist: DistributionSpec, q: float) -> float:
    """Lower quantile: inf{x : F(x) >= q}."""
    if not 0.0 < q < 1.0:
        raise ParameterError("quantile level must be in (0, 1)")
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        return mu + sd * float(norm.ppf(q))
    if kind == "uniform":
        a, b = dist.params
        return a + q * (b - a)
    values, probs = _atom_table(dist)
    order = np.argsort(values, kind="stable")
    cum = 0.0
    for i in order:
        cum += probs[i]
        if cum >= q - 1e-15:
            return float(values[i])
    return float(values[order[-1]])


def median(dist: DistributionSpec) -> float:
    """Lower median: inf{x : F(x) >= 1/2}."""
    return quantile(dist, 0.5)


def tail_prob(dist: DistributionSpec, u: float) -> float:
    """P(|X| > u), strict."""
    if u < 0.0:
        return 1.0
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        return float(norm.sf((u - mu) / sd) + norm.cdf((-u - mu) / sd))
    if kind == "uniform":
        a, b = dist.params
        width = b - a
        above = max(0.0, b - max(a, u))
        below = max(0.0, min(b, -u) - a)
        return (above + below) / width
    values, probs = _atom_table(dist)
    return math.fsum(probs[np.abs(values) > u])


def _gaussian_interval_moments(mu: float, sd: float, lo: float, hi: float):
    """(mass, E X 1, E X^2 1) of N(mu, sd^2) on [lo, hi], closed form."""
    alpha = (lo - mu) / sd
    beta = (hi - mu) / sd
    dphi = float(norm.pdf(alpha) - norm.pdf(beta))
    mass = float(norm.cdf(beta) - norm.cdf(alpha))
    m1 = mu * mass + sd * dphi
    m2 = mu * mu * mass + 2.0 * mu * sd * dphi + sd * sd * (
        mass + float(alpha * norm.pdf(alpha) - beta * norm.pdf(beta))
    )
    return mass, m1, m2


def _uniform_interval_moments(a: float, b: float, lo: float, hi: float):
    lo, hi = max(a, lo), min(b, hi)
    if lo >= hi:
        return 0.0, 0.0, 0.0
    w = b - a
    mass = (hi - lo) / w
    m1 = (hi * hi - lo * lo) / (2.0 * w)
    m2 = (hi * hi * hi - lo * lo * lo) / (3.0 * w)
    return mass, m1, m2


def truncated_mean(dist: DistributionSpec, u: float, center: float = 0.0) -> float:
    """E[(X - center) 1{|X - center| <= u}]."""
    if u < 0.0:
        raise ParameterError("truncation level must be nonnegative")
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        _, m1, _ = _gaussian_interval_moments(mu - center, sd, -u, u)
        return m1
    if kind == "uniform":
        a, b = dist.params
        _, m1, _ = _uniform_interval_moments(a - center, b - center, -u, u)
        return m1
    values, probs = _atom_table(dist)
    shifted = values - center if center != 0.0 else values
    if u >= float(np.max(np.abs(shifted))):
        # nothing is cut off: return the registered exact mean
        return mean(dist) - center
    keep = np.abs(shifted) <= u
    return math.fsum(shifted[keep] * probs[keep])


def truncated_second_moment(dist: DistributionSpec, u: float, center: float = 0.0) -> float:
    """E[(X - center)^2 1{|X - center| <= u}]."""
    if u < 0.0:
        raise ParameterError("truncation level must be nonnegative")
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        _, _, m2 = _gaussian_interval_moments(mu - center, sd, -u, u)
        return m2
    if kind == "uniform":
        a, b = dist.params
        _, _, m2 = _uniform_interval_moments(a - center, b - center, -u, u)
        return m2
    values, probs = _atom_table(dist)
    shifted = values - center if center != 0.0 else values
    keep = np.abs(shifted) <= u
    return math.fsum(shifted[keep] * shifted[keep] * probs[keep])


def truncated_variance(dist: DistributionSpec, u: float, center: float = 0.0) -> float:
    """Var[(X - center) 1{|X - center| <= u}]."""
    m1 = truncated_mean(dist, u, center)
    m2 = truncated_second_moment(dist, u, center)
    return max(0.0, m2 - m1 * m1)


def variance_half_threshold(dist: DistributionSpec) -> float:
    """Largest t0 with E[X^2 1{|X| <= 1/t0}] >= 1/2 for a unit-variance law.

    Returns 1/u* where u* is the smallest truncation level retaining at
    least half the second moment.
    """
    if abs(variance(dist) - 1.0) > 1e-9 or abs(mean(dist)) > 1e-12:
        raise ParameterError("threshold defined for centered unit-variance laws")
    if is_discrete(dist):
        values, probs = _atom_table(dist)
        order = np.argsort(np.abs(values))
        cum = 0.0
        for i in order:
            cum += values[i] * values[i] * probs[i]
            if cum >= 0.5 - 1e-15:
                return 1.0 / abs(values[i])
        raise ParameterError("law retains less than half its second moment")
    from scipy.optimize import brentq

    lo, hi = 1e-9, 1.0
    while truncated_second_moment(dist, hi) < 0.5:
        hi *= 2.0
        if hi > 1e12:
            raise ParameterError("no finite threshold found")
    u_star = brentq(lambda u: truncated_second_moment(dist, u) - 0.5, lo, hi, xtol=1e-13)
    return 1.0 / float(u_star)


@lru_cache(maxsize=256)
def _sampling_cdf(dist: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    values, probs = _atom_table(dist)
    cum = np.cumsum(probs)
    cum[-1] = 1.0  # guard against rounding in the last slot
    return values, cum


def sample(dist: DistributionSpec, stream: Stream, count: int) -> np.ndarray:
    """Draw ``count`` i.i.d. values.  Bit-identical for equal (stream, count)."""
    if count < 0:
        raise ParameterError("count must be nonnegative")
    gen = stream.generator()
    kind = dist.kind
    if kind == "gaussian":
        mu, sd = dist.params
        return gen.normal(mu, sd, count)
    if kind == "uniform":
        a, b = dist.params
        return gen.uniform(a, b, count)
    if kind == "deterministic":
        return np.full(count, dist.params[0])
    values, cum = _sampling_cdf(dist)
    idx = np.searchsorted(cum, gen.random(count), side="right")
    return values[idx]


def to_record(dist: DistributionSpec) -> dict:
    """JSON-ready description, inverse of :func:`from_record`."""
    record: dict = {"kind": dist.kind}
    if dist.kind == "finite-discrete":
        flat = dist.params
        record["atoms"] = [[flat[i], flat[i + 1]] for i in range(0, len(flat), 2)]
    elif dist.kind == "gaussian":
        record["mean"], record["sd"] = dist.params
    elif dist.kind == "uniform":
        record["a"], record["b"] = dist.params
    elif dist.kind == "two-point":
        record["p"] = dist.params[0]
    elif dist.kind == "heavy-tailed-example":
        record["n_max"] = int(dist.params[0])
    elif dist.kind == "deterministic":
        record["c"] = dist.params[0]
    return record


def from_record(record: dict) -> DistributionSpec:
    kind = record.get("kind")
    if kind == "finite-discrete":
        return finite_discrete(record["atoms"])
    if kind == "gaussian":
        return gaussian(record["mean"], record["sd"])
    if kind == "uniform":
        return uniform(record["a"], record["b"])
    if kind == "rademacher":
        return rademacher()
    if kind == "two-point":
        return two_point(record["p"])
    if kind == "heavy-tailed-example":
        return heavy_tailed_example(record.get("n_max", 200))
    if kind == "deterministic":
        return deterministic(record["c"])
    raise ParameterError(f"unknown distribution kind {kind!r}")
