"""Polynomial chaoses: sums of tetrahedral multilinear forms.

A chaos of degree d bundles homogeneous parts of degrees 0..d over a
shared ambient dimension.  Besides plain evaluation the module provides
the decoupled evaluation (independent argument copies, one per degree
slot, averaged over slot subsets) and the symmetric kernel whose sum over
all distinct index tuples reproduces the chaos exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .tensors import SymmetricTetrahedralTensor, zero_tensor

__all__ = [
    "ChaosPolynomial",
    "chaos_from_parts",
    "evaluate",
    "evaluate_on_matrix",
    "evaluate_decoupled",
    "evaluate_decoupled_on_matrices",
    "h_kernel",
]


@dataclass(frozen=True)
class ChaosPolynomial:
    """Homogeneous parts 0..degree over one ambient dimension."""

    degree: int
    ambient_n: int
    parts: tuple[SymmetricTetrahedralTensor, ...]

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ParameterError("degree must be nonnegative")
        if len(self.parts) != self.degree + 1:
            raise ParameterError("need one part per degree 0..d")
        for k, part in enumerate(self.parts):
            if part.degree != k:
                raise ParameterError(f"part at slot {k} has degree {part.degree}")
            if part.ambient_n != self.ambient_n:
                raise ParameterError("all parts must share the ambient dimension")
            if part.value_dim != self.parts[0].value_dim:
                raise ParameterError("all parts must share the value dimension")

    @property
    def value_dim(self):
        return self.parts[0].value_dim


def chaos_from_parts(parts, degree=None, ambient_n=None) -> ChaosPolynomial:
    """Assemble a chaos from tensors of distinct degrees; absent degrees
    become zero parts."""
    parts = list(parts)
    if not parts and (degree is None or ambient_n is None):
        raise ParameterError("empty part list needs explicit degree and ambient_n")
    if ambient_n is None:
        ambient_n = parts[0].ambient_n
    if degree is None:
        degree = max(p.degree for p in parts)
    value_dim = parts[0].value_dim if parts else None
    by_degree = {}
    for part in parts:
        if part.degree in by_degree:
            raise ParameterError(f"two parts of degree {part.degree}")
        by_degree[part.degree] = part
    filled = tuple(
        by_degree.get(k, zero_tensor(k, ambient_n, value_dim)) for k in range(degree + 1)
    )
    return ChaosPolynomial(int(degree), int(ambient_n), filled)


def _zero_value(c: ChaosPolynomial):
    return 0.0 if c.value_dim is None else np.zeros(c.value_dim)


def evaluate(c: ChaosPolynomial, x):
    """Z(x) = sum of all homogeneous parts at ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (c.ambient_n,):
        raise ParameterError("argument length must equal ambient dimension")
    acc = _zero_value(c)
    for part in c.parts:
        fact = float(math.factorial(part.degree))
        for idx, value in part.entries.items():
            prod = 1.0
            for i in idx:
                prod *= x[i]
            acc = acc + value * (fact * prod)
    return acc


def evaluate_on_matrix(c: ChaosPolynomial, x_rows: np.ndarray) -> np.ndarray:
    """Vectorized ``evaluate`` over rows of an (m, ambient_n) array.

    Scalar-valued chaoses only; used by enumeration and Monte Carlo paths.
    """
    if c.value_dim is not None:
        raise ParameterError("matrix evaluation supports scalar values only")
    x_rows = np.asarray(x_rows)
    if x_rows.ndim != 2 or x_rows.shape[1] != c.ambient_n:
        raise ParameterError("need an (m, ambient_n) array")
    out = np.zeros(x_rows.shape[0])
    for part in c.parts:
        fact = float(math.factorial(part.degree))
        for idx, value in part.entries.items():
            prod = None
            for i in idx:
                col = x_rows[:, i]
                prod = col.astype(float, copy=True) if prod is None else prod * col
            if prod is None:  # degree-0 entry
                out += fact * value
            else:
                out += (fact * value) * prod
    return out


def _check_copies(c: ChaosPolynomial, count: int) -> None:
    if c.degree < 1:
        raise ParameterError("decoupled evaluation needs degree >= 1")
    if count != c.degree:
        raise ParameterError(f"need exactly {c.degree} argument copies, got {count}")


def evaluate_decoupled(c: ChaosPolynomial, copies):
    """Decoupled value of the chaos on d independent argument copies.

    The degree-k part is averaged over the C(d, k) increasing slot
    subsets; within a subset the stored coefficients are summed over all
    assignments of the index tuple to the chosen slots.  With all copies
    equal this reproduces ``evaluate`` exactly.
    """
    _check_copies(c, len(copies))
    xs = [np.asarray(x, dtype=float) for x in copies]
    for x in xs:
        if x.shape != (c.ambient_n,):
            raise ParameterError("each copy must have the ambient dimension")
    acc = _zero_value(c)
    d = c.degree
    for k, part in enumerate(c.parts):
        if not part.entries:
            continue
        weight = 1.0 / math.comb(d, k)
        for slots in itertools.combinations(range(d), k):
            for idx, value in part.entries.items():
                total = 0.0
                for assign in itertools.permutations(idx):
                    prod = 1.0
                    for slot, i in zip(slots, assign):
                        prod *= xs[slot][i]
                    total += prod
                acc = acc + value * (weight * total)
    return acc


def evaluate_decoupled_on_matrices(c: ChaosPolynomial, copies) -> np.ndarray:
    """Vectorized ``evaluate_decoupled``: each copy is an (m, ambient_n) array."""
    if c.value_dim is not None:
        raise ParameterError("matrix evaluation supports scalar values only")
    _check_copies(c, len(copies))
    xs = [np.asarray(x) for x in copies]
    rows = xs[0].shape[0]
    for x in xs:
        if x.ndim != 2 or x.shape != (rows, c.ambient_n):
            raise ParameterError("copies must be equal-shape (m, ambient_n) arrays")
    out = np.zeros(rows)
    d = c.degree
    for k, part in enumerate(c.parts):
        if not part.entries:
            continue
        weight = 1.0 / math.comb(d, k)
        for slots in itertools.combinations(range(d), k):
            for idx, value in part.entries.items():
                if k == 0:
                    out += weight * value
                    continue
                total = np.zeros(rows)
                for assign in itertools.permutations(idx):
                    prod = None
                    for slot, i in zip(slots, assign):
                        col = xs[slot][:, i]
                        prod = col.astype(float, copy=True) if prod is None else prod * col
                    total += prod
                out += (weight * value) * total
    return out


def h_kernel(c: ChaosPolynomial, indices, args, ambient_total: int):
    """Symmetric kernel h at one distinct index tuple.

    ``indices`` are d pairwise distinct positions below ``ambient_total``
    (which may exceed the chaos's own ambient dimension); ``args`` are the
    d real arguments.  Summing ``h_kernel`` times nothing (the arguments
    are supplied by the caller) over all ordered distinct d-tuples of
    positions, with ``args`` the input values at those positions,
    reproduces ``evaluate`` exactly.  The degree-k term carries weight
    (d-k)!/d! * (N-d)!/(N-k)! so the overcounting cancels; at k = 0 this
    is (N-d)!/N! times the constant coefficient.
    """
    d = c.degree
    idx = tuple(int(i) for i in indices)
    if len(idx) != d:
        raise ParameterError(f"need {d} indices")
    if len(set(idx)) != d:
        raise ParameterError("indices must be pairwise distinct")
    N = int(ambient_total)
    if N < d:
        raise ParameterError("ambient total must be at least the degree")
    if any(not 0 <= i < N for i in idx):
        raise ParameterError("indices must lie below ambient_total")
    args = np.asarray(args, dtype=float)
    if args.shape != (d,):
        raise ParameterError("need one argument per index")
    acc = _zero_value(c)
    for k, part in enumerate(c.parts):
        if not part.entries:
            continue
        weight = (
            math.factorial(d - k)
            / math.factorial(d)
            * (math.factorial(N - d) / math.factorial(N - k))
        )
        for slots in itertools.permutations(range(d), k):
            pos = tuple(idx[r] for r in slots)
            if k > 0:
                if any(p >= c.ambient_n for p in pos):
                    continue  # coefficient is zero outside the chaos support
                coef = part.entries.get(tuple(sorted(pos)))
                if coef is None:
                    continue
                # stored value only at sorted tuples; symmetry gives the rest
                prod = 1.0
                for r in slots:
                    prod *= args[r]
                acc = acc + coef * (weight * prod)
            else:
                acc = acc + part.entries[()] * weight
    return acc
