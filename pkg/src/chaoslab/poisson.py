"""Poisson multiple integrals on finite cell spaces.

A cell space is a finite list of disjoint cells with positive intensities
``lambda_i``.  Step kernels are tetrahedral tensors over the cells, so
the degree-k multiple integral of a kernel is the multilinear form in the
centered counts N_i - lambda_i.  The explicit alternating-sum route
through factorial measures is implemented separately and must agree
exactly; it is the package's cross-check of the compensation algebra.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError, ParameterError
from .streams import Stream
from .tensors import SymmetricTetrahedralTensor

__all__ = [
    "CellSpace",
    "StepKernel",
    "PoissonSample",
    "PoissonFunctional",
    "unit_interval_space",
    "sample_process",
    "sample_counts",
    "trim",
    "multiple_integral",
    "multiple_integral_batch",
    "wiener_ito_explicit",
    "falling_factorial_product",
    "integral_second_moment_exact",
    "simulate_first_chaos_example",
    "FirstChaosPaths",
    "mehler_apply",
]

_EXPLICIT_DEGREE_CAP = 4  # the alternating-sum route enumerates 2^k subsets


@dataclass(frozen=True)
class CellSpace:
    """Finite family of disjoint cells with intensities ``rates``."""

    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.rates:
            raise ParameterError("a cell space needs at least one cell")
        if any(not r > 0.0 for r in self.rates):
            raise ParameterError("cell intensities must be positive")

    @property
    def size(self) -> int:
        return len(self.rates)


def unit_interval_space(rate: float = 1.0) -> CellSpace:
    """The interval [0, 1] as a single cell of total intensity ``rate``."""
    return CellSpace((float(rate),))


@dataclass(frozen=True)
class StepKernel:
    """Symmetric tetrahedral kernel over the cells of ``space``."""

    space: CellSpace
    tensor: SymmetricTetrahedralTensor

    def __post_init__(self) -> None:
        if self.tensor.ambient_n != self.space.size:
            raise ParameterError("kernel tensor must live on the space's cells")
        if self.tensor.value_dim is not None:
            raise ParameterError("step kernels are scalar-valued")

    @property
    def degree(self) -> int:
        return self.tensor.degree


@dataclass(frozen=True, eq=False)
class PoissonSample:
    """One realization: per-cell counts, optionally the point positions
    for an interval realization."""

    space: CellSpace
    counts: np.ndarray
    points: np.ndarray | None = None

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (self.space.size,):
            raise ParameterError("need one count per cell")
        if np.any(counts < 0):
            raise ParameterError("counts must be nonnegative")
        object.__setattr__(self, "counts", counts)
        if self.points is not None:
            pts = np.asarray(self.points, dtype=float)
            if self.space.size != 1:
                raise ParameterError("point positions make sense for a single interval cell")
            if pts.shape != (int(counts[0]),):
                raise ParameterError("points must match the cell count")
            object.__setattr__(self, "points", pts)


def sample_process(space: CellSpace, stream: Stream, with_points: bool = False) -> PoissonSample:
    """One Poisson realization of the space.  With ``with_points`` (single
    interval cell only) the positions are i.i.d. uniform on [0, 1),
    sorted."""
    gen = stream.generator()
    counts = gen.poisson(np.asarray(space.rates))
    if not with_points:
        return PoissonSample(space, counts)
    if space.size != 1:
        raise ParameterError("with_points requires the single-cell interval space")
    pts = np.sort(gen.uniform(0.0, 1.0, int(counts[0])))
    return PoissonSample(space, counts, pts)


def sample_counts(space: CellSpace, stream: Stream, paths: int) -> np.ndarray:
    """(paths, cells) matrix of independent Poisson counts."""
    if paths < 0:
        raise ParameterError("paths must be nonnegative")
    gen = stream.generator()
    return gen.poisson(np.asarray(space.rates), size=(paths, space.size))


def trim(sample: PoissonSample, t: float, stream: Stream) -> PoissonSample:
    """Independent thinning: keep each point with probability ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ParameterError("retention probability must be in [0, 1]")
    if sample.points is None:
        raise ParameterError("trimming needs point positions")
    gen = stream.generator()
    keep = gen.random(sample.points.size) < t
    pts = sample.points[keep]
    return PoissonSample(sample.space, np.array([pts.size]), pts)


def multiple_integral(kernel: StepKernel, sample: PoissonSample) -> float:
    """I_k(f) = k! * sum over stored tuples of a * prod (N_i - lambda_i)."""
    centered = sample.counts.astype(float) - np.asarray(kernel.space.rates)
    fact = float(math.factorial(kernel.degree))
    total = 0.0
    for idx, value in kernel.tensor.entries.items():
        prod = 1.0
        for i in idx:
            prod *= centered[i]
        total += value * prod
    return fact * total


def multiple_integral_batch(kernel: StepKernel, counts: np.ndarray) -> np.ndarray:
    """Vectorized :func:`multiple_integral` over a (paths, cells) matrix."""
    counts = np.asarray(counts)
    if counts.ndim != 2 or counts.shape[1] != kernel.space.size:
        raise ParameterError("need a (paths, cells) count matrix")
    centered = counts.astype(float) - np.asarray(kernel.space.rates)
    fact = float(math.factorial(kernel.degree))
    out = np.zeros(counts.shape[0])
    for idx, value in kernel.tensor.entries.items():
        prod = None
        for i in idx:
            col = centered[:, i]
            prod = col.copy() if prod is None else prod * col
        out += value if prod is None else value * prod
    return fact * out


def falling_factorial_product(counts, cells) -> float:
    """Factorial-measure box count: product over cells of
    N (N-1) ... (N - multiplicity + 1) for the multiset ``cells``."""
    mult: dict[int, int] = {}
    for c in cells:
        mult[c] = mult.get(c, 0) + 1
    prod = 1.0
    for c, m in mult.items():
        n = int(counts[c])
        for j in range(m):
            prod *= n - j
    return prod


def wiener_ito_explicit(kernel: StepKernel, sample: PoissonSample) -> float:
    """The multiple integral via its alternating finite-sum form.

    Sums over argument subsets J of {1..k}: (-1)^(k-|J|) times the
    integral of the kernel with J-arguments against the factorial measure
    of the sample and the rest against the intensity.  Step kernels make
    each term a finite sum over ordered distinct cell tuples, with
    per-cell falling-factorial counts.  Agrees with
    :func:`multiple_integral` identically; kept separate as a cross-check.
    """
    k = kernel.degree
    if k > _EXPLICIT_DEGREE_CAP:
        raise EnumerationCapError(f"explicit route capped at degree {_EXPLICIT_DEGREE_CAP}")
    rates = kernel.space.rates
    counts = kernel.tensor.entries
    if k == 0:
        return counts.get((), 0.0)
    total = 0.0
    for subset_size in range(k + 1):
        sign = (-1.0) ** (k - subset_size)
        for positions in itertools.combinations(range(k), subset_size):
            pos_set = set(positions)
            term = 0.0
            for idx, value in kernel.tensor.entries.items():
                for ordered in itertools.permutations(idx):
                    eta_cells = [ordered[r] for r in range(k) if r in pos_set]
                    lam_prod = 1.0
                    for r in range(k):
                        if r not in pos_set:
                            lam_prod *= rates[ordered[r]]
                    term += value * falling_factorial_product(sample.counts, eta_cells) * lam_prod
            total += sign * term
    return total


def integral_second_moment_exact(kernel: StepKernel) -> float:
    """E I_k(f)^2 = k! ||f||^2 with the norm over ordered tuples:
    (k!)^2 * sum over stored tuples of a^2 * prod lambda_i."""
    fact = float(math.factorial(kernel.degree))
    rates = kernel.space.rates
    total = 0.0
    for idx, value in kernel.tensor.entries.items():
        prod = 1.0
        for i in idx:
            prod *= rates[i]
        total += value * value * prod
    return fact * fact * total


@dataclass(frozen=True, eq=False)
class FirstChaosPaths:
    """Ensemble for the degree-one example F_n = n eta([0, 1/n]) - 1.

    ``stabilization`` holds, per path, the smallest n with F_m = -1 for
    every m >= n (paths with no points stabilize at 1).
    """

    stabilization: np.ndarray

    @property
    def paths(self) -> int:
        return self.stabilization.size

    def empirical_cdf(self, n: int) -> float:
        return float(np.mean(self.stabilization <= n))

    def all_stabilized(self) -> bool:
        return bool(np.all(np.isfinite(self.stabilization)))


def simulate_first_chaos_example(paths: int, stream: Stream) -> FirstChaosPaths:
    """Sample unit-rate interval processes and record when the rescaled
    count of [0, 1/n] locks at zero, i.e. F_n = -1 from then on.

    The index equals ceil(1/x_min) for the smallest point x_min, and 1
    when the realization has no points; it is a.s. finite.  Its exact law
    is P(index <= n) = exp(-1/n).
    """
    if paths < 1:
        raise ParameterError("need at least one path")
    gen = stream.generator()
    kappa = gen.poisson(1.0, paths)
    out = np.ones(paths, dtype=float)
    hits = np.nonzero(kappa > 0)[0]
    for i in hits:
        x_min = float(np.min(gen.uniform(0.0, 1.0, int(kappa[i]))))
        out[i] = math.ceil(1.0 / x_min)
    return FirstChaosPaths(out)


@dataclass(frozen=True)
class PoissonFunctional:
    """F = constant + sum of multiple integrals of the given kernels."""

    space: CellSpace
    constant: float
    kernels: tuple[StepKernel, ...]

    def __post_init__(self) -> None:
        for kernel in self.kernels:
            if kernel.space != self.space:
                raise ParameterError("all kernels must share the space")
            if kernel.degree == 0:
                raise ParameterError("fold degree-0 terms into the constant")

    def value_batch(self, counts: np.ndarray) -> np.ndarray:
        out = np.full(np.asarray(counts).shape[0], self.constant)
        for kernel in self.kernels:
            out += multiple_integral_batch(kernel, counts)
        return out


def mehler_apply(
    functional: PoissonFunctional,
    t: float,
    stream: Stream,
    outer_paths: int = 64,
    inner_paths: int = 4096,
):
    """Estimate the interpolation semigroup P_t F and compare with its
    chaos form E F + sum_k t^k I_k(f_k).

    For each outer realization eta, P_t F(eta) is the mean of F over
    inner resamplings that keep each point of eta with probability t and
    superpose fresh intensity (1-t) lambda.  Returns per-outer-path
    deviations and inner standard errors; at t = 1 the inner law is
    degenerate and the comparison is exact.
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError("interpolation parameter must be in [0, 1]")
    if outer_paths < 1 or inner_paths < 1:
        raise ParameterError("need at least one outer and one inner path")
    space = functional.space
    rates = np.asarray(space.rates)
    deviations = np.empty(outer_paths)
    inner_ses = np.empty(outer_paths)
    for j in range(outer_paths):
        outer_gen = stream.child("outer", j).generator()
        base = outer_gen.poisson(rates)
        # same accumulation route as value_batch so t = 1 is bit-exact
        target = functional.constant
        for kernel in functional.kernels:
            target += (t ** kernel.degree) * float(
                multiple_integral_batch(kernel, base[np.newaxis, :])[0]
            )
        inner_gen = stream.child("inner", j).generator()
        kept = inner_gen.binomial(base[np.newaxis, :], t, size=(inner_paths, space.size))
        fresh = inner_gen.poisson((1.0 - t) * rates, size=(inner_paths, space.size))
        values = functional.value_batch(kept + fresh)
        # fsum keeps the degenerate t = 1 case bit-exact (power-of-two
        # path counts divide out of the compensated sum)
        estimate = math.fsum(values) / inner_paths
        spread = float(np.std(values, ddof=1)) if inner_paths > 1 else 0.0
        deviations[j] = abs(estimate - target)
        inner_ses[j] = spread / math.sqrt(inner_paths)
    return {
        "t": t,
        "outer_paths": outer_paths,
        "inner_paths": inner_paths,
        "deviations": deviations,
        "inner_standard_errors": inner_ses,
        "max_deviation": float(np.max(deviations)),
        "max_normalized": float(
            np.max(deviations / np.maximum(4.0 * inner_ses, 1e-300))
        ),
    }
