import itertools
import math

import numpy as np
import pytest

from chaoslab import chaos as ch
from chaoslab import distributions as d
from chaoslab import tensors as tns
from chaoslab.errors import ParameterError
from chaoslab.streams import Stream

ROOT = Stream(97)
GAUSS = d.gaussian(0.0, 1.0)


def random_chaos(degree, n, support, stream, include_constant=True):
    parts = []
    for k in range(0 if include_constant else 1, degree + 1):
        parts.append(
            tns.random_tensor(k, n, min(support, math.comb(n, k)), GAUSS, stream.child(k))
        )
    return ch.chaos_from_parts(parts, degree=degree, ambient_n=n)


def brute_evaluate(c, x):
    total = 0.0
    for part in c.parts:
        for idx in itertools.product(range(c.ambient_n), repeat=part.degree):
            coef = tns.full_coefficient(part, idx)
            prod = 1.0
            for i in idx:
                prod *= x[i]
            total += coef * prod
    return total


def brute_decoupled(c, copies):
    """Independent route: ordered index tuples x slot subsets."""
    d_ = c.degree
    total = 0.0
    for part in c.parts:
        k = part.degree
        if k == 0:
            total += part.entries.get((), 0.0)
            continue
        weight = 1.0 / math.comb(d_, k)
        for slots in itertools.combinations(range(d_), k):
            for idx in itertools.product(range(c.ambient_n), repeat=k):
                coef = tns.full_coefficient(part, idx)
                if coef == 0.0:
                    continue
                prod = 1.0
                for slot, i in zip(slots, idx):
                    prod *= copies[slot][i]
                total += weight * coef * prod
    return total


# ---------------------------------------------------------------- evaluate


def test_constant_chaos():
    c = ch.chaos_from_parts([tns.tensor_from_entries(0, 3, {(): 5.0})])
    for x in (np.zeros(3), np.ones(3), np.array([2.0, -7.0, 0.5])):
        assert ch.evaluate(c, x) == 5.0


def test_two_point_example_identity():
    # 1 - (sqrt(p(1-p))/(1-p)) X vanishes at the frequent atom
    p = 0.5
    s = math.sqrt(p * (1 - p))
    c = ch.chaos_from_parts(
        [
            tns.tensor_from_entries(0, 1, {(): 1.0}),
            tns.tensor_from_entries(1, 1, {(0,): -s / (1 - p)}),
        ]
    )
    x = np.array([(1 - p) / s])
    assert ch.evaluate(c, x) == 0.0
    for p in (0.2, 0.8, 0.99):
        s = math.sqrt(p * (1 - p))
        c = ch.chaos_from_parts(
            [
                tns.tensor_from_entries(0, 1, {(): 1.0}),
                tns.tensor_from_entries(1, 1, {(0,): -s / (1 - p)}),
            ]
        )
        x = np.array([(1 - p) / s])
        assert ch.evaluate(c, x) == pytest.approx(0.0, abs=1e-15)


def test_evaluate_matches_brute_force():
    c = random_chaos(3, 6, 5, ROOT.child("brute"))
    x = d.sample(GAUSS, ROOT.child("brute-arg"), 6)
    assert ch.evaluate(c, x) == pytest.approx(brute_evaluate(c, x), rel=1e-12)


def test_evaluate_dimension_check():
    c = random_chaos(2, 4, 3, ROOT.child("dim"))
    with pytest.raises(ParameterError):
        ch.evaluate(c, np.ones(5))


def test_evaluate_on_matrix_matches_scalar():
    c = random_chaos(3, 7, 6, ROOT.child("mat"))
    rows = d.sample(GAUSS, ROOT.child("mat-arg"), 5 * 7).reshape(5, 7)
    batch = ch.evaluate_on_matrix(c, rows)
    for i in range(5):
        assert batch[i] == pytest.approx(ch.evaluate(c, rows[i]), rel=1e-12)


def test_vector_valued_chaos():
    c = ch.chaos_from_parts(
        [
            tns.tensor_from_entries(0, 2, {(): [1.0, -1.0]}, value_dim=2),
            tns.tensor_from_entries(1, 2, {(0,): [2.0, 0.0]}, value_dim=2),
        ]
    )
    out = ch.evaluate(c, np.array([3.0, 9.0]))
    assert np.array_equal(out, np.array([7.0, -1.0]))


def test_parts_validation():
    with pytest.raises(ParameterError):
        ch.chaos_from_parts(
            [
                tns.tensor_from_entries(1, 3, {(0,): 1.0}),
                tns.tensor_from_entries(1, 3, {(1,): 1.0}),
            ]
        )
    with pytest.raises(ParameterError):
        ch.chaos_from_parts([])


# ---------------------------------------------------------------- decoupled


def test_decoupled_identity_copies():
    for deg in (1, 2, 3, 4):
        c = random_chaos(deg, 6, 4, ROOT.child("recouple", deg))
        x = d.sample(GAUSS, ROOT.child("recouple-arg", deg), 6)
        direct = ch.evaluate(c, x)
        dec = ch.evaluate_decoupled(c, [x] * deg)
        assert dec == pytest.approx(direct, rel=1e-9, abs=1e-12)


def test_decoupled_single_copy_is_evaluate():
    c = random_chaos(1, 5, 3, ROOT.child("d1"))
    x = d.sample(GAUSS, ROOT.child("d1-arg"), 5)
    assert ch.evaluate_decoupled(c, [x]) == pytest.approx(ch.evaluate(c, x), rel=1e-12)


def test_decoupled_hand_example():
    # degree-2 entry {(0,1): 1}: e0 in slot 1, e1 in slot 2 -> exactly 1
    c = ch.chaos_from_parts(
        [tns.tensor_from_entries(2, 4, {(0, 1): 1.0})], degree=2, ambient_n=4
    )
    e0, e1 = np.eye(4)[0], np.eye(4)[1]
    assert ch.evaluate_decoupled(c, [e0, e1]) == 1.0


def test_decoupled_matches_independent_expansion():
    c = random_chaos(3, 5, 4, ROOT.child("dec"))
    copies = [d.sample(GAUSS, ROOT.child("dec-arg", r), 5) for r in range(3)]
    want = brute_decoupled(c, copies)
    assert ch.evaluate_decoupled(c, copies) == pytest.approx(want, rel=1e-11)


def test_decoupled_copy_count_check():
    c = random_chaos(2, 4, 3, ROOT.child("count"))
    x = np.ones(4)
    with pytest.raises(ParameterError):
        ch.evaluate_decoupled(c, [x])


def test_decoupled_on_matrices_matches_scalar():
    c = random_chaos(2, 6, 5, ROOT.child("dmat"))
    rows = [d.sample(GAUSS, ROOT.child("dmat-arg", r), 4 * 6).reshape(4, 6) for r in range(2)]
    batch = ch.evaluate_decoupled_on_matrices(c, rows)
    for i in range(4):
        want = ch.evaluate_decoupled(c, [rows[0][i], rows[1][i]])
        assert batch[i] == pytest.approx(want, rel=1e-12)


# ----------------------------------------------------------------- h kernel


def test_h_kernel_permutation_symmetry():
    c = random_chaos(3, 6, 4, ROOT.child("hperm"))
    idx = (4, 0, 2)
    args = (0.7, -1.3, 2.1)
    base = ch.h_kernel(c, idx, args, ambient_total=8)
    for perm in itertools.permutations(range(3)):
        permuted = ch.h_kernel(
            c,
            tuple(idx[p] for p in perm),
            tuple(args[p] for p in perm),
            ambient_total=8,
        )
        assert permuted == pytest.approx(base, rel=1e-12)


def test_h_kernel_degree_zero_weight():
    # a_0 = N!/(N-d)! makes each kernel value 1, so the sum over all
    # distinct tuples returns a_0
    n_total, deg = 6, 2
    a0 = float(math.factorial(n_total) // math.factorial(n_total - deg))
    c = ch.chaos_from_parts(
        [tns.tensor_from_entries(0, 3, {(): a0})], degree=deg, ambient_n=3
    )
    val = ch.h_kernel(c, (5, 1), (0.3, 0.4), ambient_total=n_total)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_h_kernel_sum_reconstructs_evaluate():
    for deg, n in [(1, 5), (2, 5), (3, 6)]:
        c = random_chaos(deg, n, 4, ROOT.child("hsum", deg, n))
        x = d.sample(GAUSS, ROOT.child("hsum-arg", deg, n), n)
        total = math.fsum(
            ch.h_kernel(c, idx, tuple(x[i] for i in idx), ambient_total=n)
            for idx in itertools.permutations(range(n), deg)
        )
        scale = max(1.0, abs(ch.evaluate(c, x)))
        assert abs(total - ch.evaluate(c, x)) / scale < 1e-10


def test_h_kernel_validation():
    c = random_chaos(2, 4, 3, ROOT.child("hval"))
    with pytest.raises(ParameterError):
        ch.h_kernel(c, (1, 1), (0.0, 0.0), ambient_total=5)
    with pytest.raises(ParameterError):
        ch.h_kernel(c, (0, 1), (0.0, 0.0), ambient_total=1)
