import itertools
import math

import numpy as np
import pytest

from chaoslab import distributions as d
from chaoslab import tensors as tns
from chaoslab.errors import ParameterError
from chaoslab.streams import Stream

ROOT = Stream(41)


def brute_value(tensor, x):
    """O(n^k) oracle: sum over ALL ordered k-tuples."""
    total = 0.0
    for idx in itertools.product(range(tensor.ambient_n), repeat=tensor.degree):
        coef = tns.full_coefficient(tensor, idx)
        prod = 1.0
        for i in idx:
            prod *= x[i]
        total += coef * prod
    return total


def brute_l2(tensor):
    return math.fsum(
        tns.full_coefficient(tensor, idx) ** 2
        for idx in itertools.product(range(tensor.ambient_n), repeat=tensor.degree)
    )


# ------------------------------------------------------------ coefficients


def test_full_coefficient_diagonal_vanishes():
    t = tns.tensor_from_entries(2, 6, {(0, 1): 1.5})
    assert tns.full_coefficient(t, (3, 3)) == 0.0


def test_full_coefficient_symmetry():
    t = tns.tensor_from_entries(2, 6, {(2, 5): -0.25})
    assert tns.full_coefficient(t, (5, 2)) == tns.full_coefficient(t, (2, 5)) == -0.25


def test_full_coefficient_degree_zero():
    t = tns.tensor_from_entries(0, 4, {(): 7.0})
    assert tns.full_coefficient(t, ()) == 7.0


def test_full_coefficient_arity_check():
    t = tns.tensor_from_entries(2, 6, {(0, 1): 1.0})
    with pytest.raises(ParameterError):
        tns.full_coefficient(t, (0, 1, 2))


def test_entry_validation():
    with pytest.raises(ParameterError):
        tns.tensor_from_entries(2, 6, {(1, 1): 1.0})  # repeated index
    with pytest.raises(ParameterError):
        tns.tensor_from_entries(2, 6, {(0, 7): 1.0})  # out of range
    with pytest.raises(ParameterError):
        tns.tensor_from_entries(3, 2, {})  # degree exceeds ambient
    # unsorted input tuples are canonicalized, not rejected
    t = tns.tensor_from_entries(2, 6, {(4, 1): 2.0})
    assert t.entries == {(1, 4): 2.0}
    with pytest.raises(ParameterError):
        tns.tensor_from_entries(2, 6, {(4, 1): 2.0, (1, 4): 3.0})  # collide


# -------------------------------------------------------------- evaluation


def test_evaluate_linear_form():
    t = tns.tensor_from_entries(1, 5, {(0,): 2.0, (3,): -1.0})
    e0 = np.eye(5)[0]
    assert tns.evaluate_homogeneous(t, e0) == 2.0


def test_evaluate_degree_two_symmetric_copies():
    t = tns.tensor_from_entries(2, 4, {(0, 1): 1.0})
    x = np.array([1.0, 1.0, 0.0, 0.0])
    assert tns.evaluate_homogeneous(t, x) == 2.0


def test_evaluate_matches_brute_force_oracle():
    gauss = d.gaussian(0.0, 1.0)
    for k, n in [(3, 6), (1, 5), (2, 8), (4, 8), (0, 3)]:
        size = min(6, math.comb(n, k))
        t = tns.random_tensor(k, n, size, gauss, ROOT.child("brute", k, n))
        x = d.sample(gauss, ROOT.child("arg", k, n), n)
        want = brute_value(t, x)
        got = tns.evaluate_homogeneous(t, x)
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_evaluate_length_check():
    t = tns.tensor_from_entries(2, 4, {(0, 1): 1.0})
    with pytest.raises(ParameterError):
        tns.evaluate_homogeneous(t, np.ones(5))


def test_coordinatewise_linearity():
    t = tns.random_tensor(3, 7, 10, d.gaussian(0.0, 1.0), ROOT.child("lin"))
    x = d.sample(d.gaussian(0.0, 1.0), ROOT.child("lin-arg"), 7)
    for j in (0, 4, 6):
        def at(alpha):
            y = x.copy()
            y[j] = alpha
            return tns.evaluate_homogeneous(t, y)

        f0, f1 = at(0.0), at(1.0)
        assert at(2.5) == pytest.approx(f0 + 2.5 * (f1 - f0), rel=1e-10, abs=1e-12)


def test_permutation_invariance():
    t = tns.random_tensor(2, 6, 8, d.gaussian(0.0, 1.0), ROOT.child("perm"))
    x = d.sample(d.gaussian(0.0, 1.0), ROOT.child("perm-arg"), 6)
    perm = [3, 0, 5, 1, 2, 4]
    relabeled = tns.tensor_from_entries(
        2, 6, {tuple(sorted(perm[i] for i in idx)): v for idx, v in t.entries.items()}
    )
    y = np.empty(6)
    for i in range(6):
        y[perm[i]] = x[i]
    a = tns.evaluate_homogeneous(t, x)
    b = tns.evaluate_homogeneous(relabeled, y)
    assert a == pytest.approx(b, rel=1e-12)


# ---------------------------------------------------------------- l2 norm


def test_l2_norm_examples():
    assert tns.l2_norm_sq(tns.zero_tensor(3, 5)) == 0.0
    t = tns.tensor_from_entries(2, 4, {(1, 3): 3.0})
    assert tns.l2_norm_sq(t) == 18.0


def test_l2_norm_matches_brute_force():
    t = tns.random_tensor(3, 7, 12, d.gaussian(0.0, 1.0), ROOT.child("l2"))
    assert tns.l2_norm_sq(t) == pytest.approx(brute_l2(t), rel=1e-12)


# ------------------------------------------------------------ random_tensor


def test_random_tensor_support():
    t = tns.random_tensor(2, 5, 10, d.rademacher(), ROOT.child("supp"))
    assert len(t.entries) == 10 == math.comb(5, 2)
    assert all(a < b for a, b in t.entries)
    assert set(t.entries.values()) <= {-1.0, 1.0}


def test_random_tensor_degree_zero():
    t = tns.random_tensor(0, 5, 1, d.gaussian(0.0, 1.0), ROOT.child("deg0"))
    assert list(t.entries) == [()]


def test_random_tensor_reproducible():
    a = tns.random_tensor(2, 9, 7, d.gaussian(0.0, 1.0), ROOT.child("twice"))
    b = tns.random_tensor(2, 9, 7, d.gaussian(0.0, 1.0), ROOT.child("twice"))
    assert a == b


def test_random_tensor_support_cap():
    with pytest.raises(ParameterError):
        tns.random_tensor(2, 5, 11, d.rademacher(), ROOT.child("cap"))


# ----------------------------------------------------------------- records


def test_record_round_trip_scalar():
    t = tns.random_tensor(2, 6, 5, d.gaussian(0.0, 1.0), ROOT.child("rec"))
    assert tns.from_record(tns.to_record(t)) == t


def test_record_round_trip_vector():
    t = tns.tensor_from_entries(
        1, 3, {(0,): [1.0, -2.0], (2,): [0.5, 0.0]}, value_dim=2
    )
    back = tns.from_record(tns.to_record(t))
    assert back.value_dim == 2
    assert set(back.entries) == set(t.entries)
    for idx in t.entries:
        assert np.array_equal(back.entries[idx], t.entries[idx])
