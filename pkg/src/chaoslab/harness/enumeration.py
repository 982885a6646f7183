"""Exact enumeration oracles over sign patterns.

Rademacher inputs make every chaos functional a finite object: 2^n sign
patterns, each of probability 2^-n, so tail probabilities are integer
counts divided by a power of two (exact in binary floating point).
These oracles certify the decoupling and reverse-triangle constants and
cross-check Monte Carlo estimates.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..chaos import (
    ChaosPolynomial,
    evaluate_decoupled_on_matrices,
    evaluate_on_matrix,
    h_kernel,
)
from ..errors import EnumerationCapError, ParameterError
from ..tensors import l2_norm_sq

__all__ = [
    "pattern_matrix",
    "exact_tail",
    "exact_values",
    "exact_decoupled_tail",
    "exact_decoupled_values",
    "min_decoupling_constant",
    "reverse_triangle_check",
    "sum_h_kernel",
    "enumerated_second_moment",
    "enumerated_cross_moment",
]

_PATTERN_CAP = 20
_DECOUPLED_CAP = 24
_CHUNK_BITS = 18


def pattern_matrix(n: int) -> np.ndarray:
    """All 2^n sign patterns as a (2^n, n) array of +-1 (int8)."""
    if n < 0:
        raise ParameterError("n must be nonnegative")
    if n > _PATTERN_CAP:
        raise EnumerationCapError(f"sign-pattern enumeration capped at n = {_PATTERN_CAP}")
    codes = np.arange(2**n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1
    return (2 * bits - 1).astype(np.int8)


def exact_values(c: ChaosPolynomial) -> np.ndarray:
    """Chaos values on every sign pattern (ambient_n <= 20)."""
    return evaluate_on_matrix(c, pattern_matrix(c.ambient_n))


def exact_tail(c: ChaosPolynomial, threshold: float) -> float:
    """Exact P(|Z| >= threshold) under i.i.d. signs."""
    vals = exact_values(c)
    count = int(np.count_nonzero(np.abs(vals) >= threshold))
    return count / float(2**c.ambient_n)


def _decoupled_pattern_chunks(d: int, n: int):
    total_bits = d * n
    shifts = np.arange(total_bits, dtype=np.int64)
    total = 1 << total_bits
    step = 1 << min(_CHUNK_BITS, total_bits)
    for lo in range(0, total, step):
        codes = np.arange(lo, min(lo + step, total), dtype=np.int64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        signs = 2 * bits - 1
        yield [signs[:, j * n : (j + 1) * n] for j in range(d)]


def exact_decoupled_values(c: ChaosPolynomial) -> np.ndarray:
    """Decoupled chaos values on all 2^(d*n) joint sign patterns.

    Memory grows as 2^(d*n) floats; the cap keeps it near 128 MiB.
    """
    d, n = c.degree, c.ambient_n
    if d == 0:
        return exact_values(c)
    if d * n > _DECOUPLED_CAP:
        raise EnumerationCapError(
            f"decoupled enumeration capped at degree * ambient_n = {_DECOUPLED_CAP}"
        )
    chunks = [
        evaluate_decoupled_on_matrices(c, copies)
        for copies in _decoupled_pattern_chunks(d, n)
    ]
    return np.concatenate(chunks)


def exact_decoupled_tail(c: ChaosPolynomial, threshold: float) -> float:
    """Exact P(|Z_dec| >= threshold) over all joint sign patterns."""
    d, n = c.degree, c.ambient_n
    if d == 0:
        return exact_tail(c, threshold)
    if d * n > _DECOUPLED_CAP:
        raise EnumerationCapError(
            f"decoupled enumeration capped at degree * ambient_n = {_DECOUPLED_CAP}"
        )
    count = 0
    for copies in _decoupled_pattern_chunks(d, n):
        vals = evaluate_decoupled_on_matrices(c, copies)
        count += int(np.count_nonzero(np.abs(vals) >= threshold))
    return count / float(1 << (d * n))


def _tail_fn(sorted_abs: np.ndarray):
    size = float(sorted_abs.size)

    def tail(s: float) -> float:
        return (sorted_abs.size - int(np.searchsorted(sorted_abs, s, side="right"))) / size

    return tail


def min_decoupling_constant(
    c: ChaosPolynomial,
    t_grid,
    direction: str = "both",
    c_cap: float = 1e4,
) -> float:
    """Least grid-feasible constant in the two-sided tail comparison.

    Feasibility of C means, for every t in the grid,
    P(|Z| > t) <= C P(|Z_dec| > t/C) (forward) and the same with the
    roles swapped (reverse); ``direction`` selects forward, reverse, or
    both.  Both sides are exact enumeration counts.  Feasibility is
    monotone in C, so bisection over [1, c_cap] applies; returns
    ``math.inf`` when even c_cap is infeasible on the grid.
    """
    if direction not in ("forward", "reverse", "both"):
        raise ParameterError("direction must be forward, reverse, or both")
    grid = np.asarray(list(t_grid), dtype=float)
    if grid.size == 0 or np.any(~np.isfinite(grid)) or np.any(grid <= 0):
        raise ParameterError("t_grid must be nonempty, positive and finite")
    tail_z = _tail_fn(np.sort(np.abs(exact_values(c))))
    tail_dec = _tail_fn(np.sort(np.abs(exact_decoupled_values(c))))

    def feasible(big_c: float) -> bool:
        for t in grid:
            if direction in ("forward", "both"):
                if tail_z(t) > big_c * tail_dec(t / big_c):
                    return False
            if direction in ("reverse", "both"):
                if tail_dec(t) > big_c * tail_z(t / big_c):
                    return False
        return True

    if feasible(1.0):
        return 1.0
    if not feasible(c_cap):
        return math.inf
    lo, hi = 1.0, float(c_cap)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-9 * hi:
            break
    return hi


def reverse_triangle_check(c: ChaosPolynomial, p: float = 2.0):
    """(lhs, rhs, ratio) for sum of part norms vs norm of the sum.

    Only p = 2 is supported: under centered unit-variance independent
    inputs distinct-degree tetrahedral parts are orthogonal, so both
    sides follow exactly from the coefficients.  ratio <= sqrt(d+1) by
    Cauchy-Schwarz; a zero chaos reports ratio 1.
    """
    if p != 2.0:
        raise ParameterError("only the p = 2 norms are exact; other p unsupported")
    if c.value_dim is not None:
        raise ParameterError("scalar-valued chaoses only")
    norms = [
        math.sqrt(math.factorial(part.degree) * l2_norm_sq(part)) for part in c.parts
    ]
    lhs = math.fsum(norms)
    rhs = math.sqrt(math.fsum(v * v for v in norms))
    ratio = lhs / rhs if rhs > 0 else 1.0
    return lhs, rhs, ratio


def sum_h_kernel(c: ChaosPolynomial, x) -> float:
    """Reassemble evaluate(c, x) from the symmetric kernel: sum of
    h_kernel over all ordered distinct degree-tuples of positions."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < c.degree:
        raise ParameterError("need a flat argument with at least degree entries")
    total_n = x.size
    acc = 0.0
    for idx in itertools.permutations(range(total_n), c.degree):
        acc += h_kernel(c, idx, x[list(idx)], total_n)
    return acc


def enumerated_second_moment(c: ChaosPolynomial) -> float:
    """E Z^2 under i.i.d. signs by full enumeration (compensated sum)."""
    vals = exact_values(c)
    return math.fsum(float(v) * float(v) for v in vals) / 2**c.ambient_n


def enumerated_cross_moment(a: ChaosPolynomial, b: ChaosPolynomial) -> float:
    """E Z_a Z_b under i.i.d. signs by full enumeration."""
    if a.ambient_n != b.ambient_n:
        raise ParameterError("chaoses must share the ambient dimension")
    va = exact_values(a)
    vb = exact_values(b)
    return math.fsum(float(x) * float(y) for x, y in zip(va, vb)) / 2**a.ambient_n
