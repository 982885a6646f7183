"""Sparse symmetric tensors with vanishing diagonals.

A degree-k tensor stores one scalar (or fixed-length vector) per strictly
increasing index tuple; the full symmetric array is implied.  Any tuple
with a repeated index has coefficient zero, which is what makes the
multilinear forms in :mod:`chaoslab.chaos` tetrahedral.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .streams import Stream

__all__ = [
    "SymmetricTetrahedralTensor",
    "tensor_from_entries",
    "zero_tensor",
    "full_coefficient",
    "evaluate_homogeneous",
    "l2_norm_sq",
    "random_tensor",
    "to_record",
    "from_record",
]

# strictly-increasing index tuple -> float or 1-D ndarray
_Value = "float | np.ndarray"


@dataclass(frozen=True)
class SymmetricTetrahedralTensor:
    """Coefficients of one homogeneous tetrahedral form.

    ``entries`` maps strictly increasing tuples of indices in
    ``range(ambient_n)`` to values.  ``value_dim`` is None for scalar
    coefficients, else the fixed length of every vector value.
    """

    degree: int
    ambient_n: int
    entries: dict = field(default_factory=dict)
    value_dim: int | None = None

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ParameterError("degree must be nonnegative")
        if self.ambient_n < 0:
            raise ParameterError("ambient dimension must be nonnegative")
        if self.degree > self.ambient_n:
            raise ParameterError("degree cannot exceed ambient dimension")
        for idx, value in self.entries.items():
            if len(idx) != self.degree:
                raise ParameterError(f"index tuple {idx} has wrong length")
            if any(not 0 <= i < self.ambient_n for i in idx):
                raise ParameterError(f"index tuple {idx} out of range")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ParameterError(f"index tuple {idx} is not strictly increasing")
            if self.value_dim is None:
                if not isinstance(value, float):
                    raise ParameterError("scalar tensor values must be floats")
            else:
                if not isinstance(value, np.ndarray) or value.shape != (self.value_dim,):
                    raise ParameterError("vector values must match value_dim")


def tensor_from_entries(degree, ambient_n, entries, value_dim=None) -> SymmetricTetrahedralTensor:
    """Build a tensor, normalizing index tuples and value types."""
    normalized = {}
    for idx, value in entries.items():
        key = tuple(int(i) for i in idx)
        if len(set(key)) != len(key):
            raise ParameterError(f"index tuple {key} has a repeated index")
        key = tuple(sorted(key))
        if key in normalized:
            raise ParameterError(f"duplicate entry for index set {key}")
        if value_dim is None:
            normalized[key] = float(value)
        else:
            normalized[key] = np.asarray(value, dtype=float)
    return SymmetricTetrahedralTensor(int(degree), int(ambient_n), normalized, value_dim)


def zero_tensor(degree: int, ambient_n: int, value_dim=None) -> SymmetricTetrahedralTensor:
    return SymmetricTetrahedralTensor(degree, ambient_n, {}, value_dim)


def _zero_value(tensor: SymmetricTetrahedralTensor):
    if tensor.value_dim is None:
        return 0.0
    return np.zeros(tensor.value_dim)


def full_coefficient(tensor: SymmetricTetrahedralTensor, indices):
    """Coefficient at an arbitrary ordered index tuple.

    Zero on any repeated index (the tetrahedral property); otherwise the
    stored value of the sorted tuple, by symmetry.
    """
    idx = tuple(indices)
    if len(idx) != tensor.degree:
        raise ParameterError(f"expected {tensor.degree} indices, got {len(idx)}")
    if any(not 0 <= i < tensor.ambient_n for i in idx):
        raise ParameterError(f"index tuple {idx} out of range")
    if len(set(idx)) != len(idx):
        return _zero_value(tensor)
    return tensor.entries.get(tuple(sorted(idx)), _zero_value(tensor))


def evaluate_homogeneous(tensor: SymmetricTetrahedralTensor, x):
    """Value of the form at ``x``: sum over all ordered tuples.

    Equals k! times the sum over stored increasing tuples, since every
    permutation of a stored tuple contributes the same product.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (tensor.ambient_n,):
        raise ParameterError("argument length must equal ambient dimension")
    fact = float(math.factorial(tensor.degree))
    acc = _zero_value(tensor)
    for idx, value in tensor.entries.items():
        prod = 1.0
        for i in idx:
            prod *= x[i]
        acc = acc + value * (fact * prod)
    return acc


def l2_norm_sq(tensor: SymmetricTetrahedralTensor) -> float:
    """Sum of squared coefficients over all ordered tuples: k! times the
    stored sum.  Vector values contribute their squared sup norm."""
    fact = float(math.factorial(tensor.degree))
    if tensor.value_dim is None:
        return fact * math.fsum(v * v for v in tensor.entries.values())
    return fact * math.fsum(float(np.max(np.abs(v))) ** 2 for v in tensor.entries.values())


_ENUM_CAP = 5_000_000  # combinations enumerated directly below this


def random_tensor(
    degree: int,
    ambient_n: int,
    support_size: int,
    value_law,
    stream: Stream,
) -> SymmetricTetrahedralTensor:
    """Uniformly chosen support of ``support_size`` increasing tuples with
    i.i.d. values drawn from ``value_law`` (a DistributionSpec)."""
    from . import distributions

    if support_size < 0:
        raise ParameterError("support_size must be nonnegative")
    total = math.comb(ambient_n, degree)
    if support_size > total:
        raise ParameterError(
            f"support_size {support_size} exceeds the {total} available tuples"
        )
    gen = stream.child("support").generator()
    if total <= _ENUM_CAP:
        pool = list(itertools.combinations(range(ambient_n), degree))
        chosen = [pool[i] for i in gen.choice(total, size=support_size, replace=False)]
    else:
        seen: set[tuple[int, ...]] = set()
        while len(seen) < support_size:
            draw = tuple(sorted(gen.choice(ambient_n, size=degree, replace=False).tolist()))
            seen.add(draw)
        chosen = sorted(seen)
    values = distributions.sample(value_law, stream.child("values"), support_size)
    entries = {idx: float(v) for idx, v in zip(chosen, values)}
    return SymmetricTetrahedralTensor(degree, ambient_n, entries)


def to_record(tensor: SymmetricTetrahedralTensor) -> dict:
    """JSON-ready form: {degree, ambient_n, entries: [[indices, value], ...]}."""
    if tensor.value_dim is not None:
        entries = [[list(idx), v.tolist()] for idx, v in sorted(tensor.entries.items())]
    else:
        entries = [[list(idx), v] for idx, v in sorted(tensor.entries.items())]
    return {
        "degree": tensor.degree,
        "ambient_n": tensor.ambient_n,
        "entries": entries,
        "value_dim": tensor.value_dim,
    }


def from_record(record: dict) -> SymmetricTetrahedralTensor:
    value_dim = record.get("value_dim")
    entries = {tuple(idx): value for idx, value in record["entries"]}
    return tensor_from_entries(record["degree"], record["ambient_n"], entries, value_dim)
