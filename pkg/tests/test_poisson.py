import math

import numpy as np
import pytest

from chaoslab import distributions as d
from chaoslab import poisson as ps
from chaoslab import tensors as tns
from chaoslab.errors import EnumerationCapError, ParameterError
from chaoslab.streams import Stream

ROOT = Stream(271828)
GAUSS = d.gaussian(0.0, 1.0)


def random_kernel(space, degree, stream, support=6):
    cap = min(support, math.comb(space.size, degree))
    tensor = tns.random_tensor(degree, space.size, cap, GAUSS, stream)
    return ps.StepKernel(space, tensor)


def kernel_from_entries(space, degree, entries):
    return ps.StepKernel(space, tns.tensor_from_entries(degree, space.size, entries))


# ------------------------------------------------------------------- shapes


def test_space_validation():
    with pytest.raises(ParameterError):
        ps.CellSpace(())
    with pytest.raises(ParameterError):
        ps.CellSpace((1.0, 0.0))
    assert ps.unit_interval_space(2.5).rates == (2.5,)
    assert ps.CellSpace((1.0, 2.0)).size == 2


def test_kernel_validation():
    space = ps.CellSpace((1.0, 2.0))
    with pytest.raises(ParameterError):
        ps.StepKernel(space, tns.tensor_from_entries(1, 3, {(0,): 1.0}))
    with pytest.raises(ParameterError):
        ps.StepKernel(space, tns.tensor_from_entries(1, 2, {(0,): [1.0, 2.0]}, value_dim=2))
    assert kernel_from_entries(space, 2, {(0, 1): 1.0}).degree == 2


def test_sample_validation():
    space = ps.CellSpace((1.0, 2.0))
    with pytest.raises(ParameterError):
        ps.PoissonSample(space, np.array([1]))
    with pytest.raises(ParameterError):
        ps.PoissonSample(space, np.array([1, -1]))
    with pytest.raises(ParameterError):
        ps.PoissonSample(space, np.array([1, 2]), points=np.array([0.5]))
    single = ps.unit_interval_space()
    with pytest.raises(ParameterError):
        ps.PoissonSample(single, np.array([2]), points=np.array([0.5]))


# ---------------------------------------------------------------- integrals


def test_first_integral_is_centered_count():
    space = ps.unit_interval_space(2.0)
    kernel = kernel_from_entries(space, 1, {(0,): 1.0})
    sample = ps.PoissonSample(space, np.array([3]))
    assert ps.multiple_integral(kernel, sample) == 1.0


def test_second_integral_hand_example():
    space = ps.CellSpace((1.0, 1.0))
    kernel = kernel_from_entries(space, 2, {(0, 1): 1.0})
    sample = ps.PoissonSample(space, np.array([2, 3]))
    # 2! * (2-1) * (3-1)
    assert ps.multiple_integral(kernel, sample) == 4.0


def test_zero_degree_integral_is_constant():
    space = ps.unit_interval_space()
    kernel = kernel_from_entries(space, 0, {(): 7.5})
    sample = ps.PoissonSample(space, np.array([4]))
    assert ps.multiple_integral(kernel, sample) == 7.5
    assert ps.wiener_ito_explicit(kernel, sample) == 7.5


def test_batch_matches_scalar():
    space = ps.CellSpace((0.7, 1.3, 2.0))
    kernel = random_kernel(space, 2, ROOT.child("batch"))
    counts = ps.sample_counts(space, ROOT.child("batch-counts"), 50)
    batch = ps.multiple_integral_batch(kernel, counts)
    for i in range(50):
        want = ps.multiple_integral(kernel, ps.PoissonSample(space, counts[i]))
        assert batch[i] == pytest.approx(want, rel=1e-12, abs=1e-12)
    with pytest.raises(ParameterError):
        ps.multiple_integral_batch(kernel, counts[:, :2])


def test_falling_factorial_product():
    counts = np.array([5, 2])
    assert ps.falling_factorial_product(counts, [0, 0, 1]) == 40.0
    assert ps.falling_factorial_product(counts, []) == 1.0
    assert ps.falling_factorial_product(np.array([1]), [0, 0]) == 0.0


def test_explicit_route_agrees_with_direct():
    # the compensation algebra: alternating factorial-measure sums must
    # reproduce the centered-product form on every realization
    for i in range(20):
        stream = ROOT.child("explicit", i)
        size = 3 + i % 3
        rates = tuple(0.5 + 0.25 * j for j in range(size))
        space = ps.CellSpace(rates)
        degree = 1 + i % 3
        kernel = random_kernel(space, degree, stream.child("kernel"))
        counts = ps.sample_counts(space, stream.child("counts"), 3)
        for row in counts:
            sample = ps.PoissonSample(space, row)
            direct = ps.multiple_integral(kernel, sample)
            explicit = ps.wiener_ito_explicit(kernel, sample)
            assert explicit == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_explicit_route_degree_four_and_cap():
    space = ps.CellSpace((1.0, 0.5, 1.5, 0.8, 1.2))
    kernel = random_kernel(space, 4, ROOT.child("deg4"), support=5)
    sample = ps.PoissonSample(space, ps.sample_counts(space, ROOT.child("deg4-c"), 1)[0])
    direct = ps.multiple_integral(kernel, sample)
    assert ps.wiener_ito_explicit(kernel, sample) == pytest.approx(direct, rel=1e-9, abs=1e-9)
    big = ps.StepKernel(
        space, tns.tensor_from_entries(5, 5, {(0, 1, 2, 3, 4): 1.0})
    )
    with pytest.raises(EnumerationCapError):
        ps.wiener_ito_explicit(big, sample)


# ----------------------------------------------------------------- isometry


def test_second_moment_examples():
    assert ps.integral_second_moment_exact(
        kernel_from_entries(ps.unit_interval_space(2.0), 1, {(0,): 1.0})
    ) == 2.0
    assert ps.integral_second_moment_exact(
        kernel_from_entries(ps.CellSpace((1.0, 2.0)), 2, {(0, 1): 3.0})
    ) == 72.0


def test_isometry_monte_carlo():
    space = ps.CellSpace((1.0, 2.0))
    kernel = kernel_from_entries(space, 2, {(0, 1): 3.0})
    counts = ps.sample_counts(space, ROOT.child("iso"), 100000)
    values = ps.multiple_integral_batch(kernel, counts)
    fluctuation = float(np.std(values)) / math.sqrt(values.size)
    assert abs(float(np.mean(values))) <= 4.0 * fluctuation
    squares = values * values
    se = float(np.std(squares)) / math.sqrt(squares.size)
    assert abs(float(np.mean(squares)) - 72.0) <= 4.0 * se


def test_different_degrees_are_orthogonal():
    space = ps.CellSpace((1.0, 0.5))
    k1 = kernel_from_entries(space, 1, {(0,): 1.5, (1,): -0.5})
    k2 = kernel_from_entries(space, 2, {(0, 1): 1.0})
    counts = ps.sample_counts(space, ROOT.child("orth"), 100000)
    products = ps.multiple_integral_batch(k1, counts) * ps.multiple_integral_batch(k2, counts)
    se = float(np.std(products)) / math.sqrt(products.size)
    assert abs(float(np.mean(products))) <= 4.0 * se


# ----------------------------------------------------------------- sampling


def test_sampling_reproducible():
    space = ps.CellSpace((0.7, 1.3))
    a = ps.sample_counts(space, ROOT.child("rep"), 10)
    b = ps.sample_counts(space, ROOT.child("rep"), 10)
    assert np.array_equal(a, b)
    s1 = ps.sample_process(space, ROOT.child("rep-one"))
    s2 = ps.sample_process(space, ROOT.child("rep-one"))
    assert np.array_equal(s1.counts, s2.counts)


def test_sample_counts_mean():
    space = ps.CellSpace((0.7, 1.3))
    counts = ps.sample_counts(space, ROOT.child("mean"), 20000)
    for j, rate in enumerate(space.rates):
        se = math.sqrt(rate / 20000)
        assert abs(float(np.mean(counts[:, j])) - rate) <= 4.0 * se
    with pytest.raises(ParameterError):
        ps.sample_counts(space, ROOT.child("mean"), -1)


def test_sample_process_points():
    sample = ps.sample_process(ps.unit_interval_space(5.0), ROOT.child("pts"), with_points=True)
    assert sample.points is not None
    assert sample.points.size == int(sample.counts[0])
    assert np.all(np.diff(sample.points) >= 0.0)
    assert np.all((sample.points >= 0.0) & (sample.points < 1.0))
    with pytest.raises(ParameterError):
        ps.sample_process(ps.CellSpace((1.0, 1.0)), ROOT.child("pts2"), with_points=True)


# --------------------------------------------------------------------- trim


def test_trim_endpoints():
    sample = ps.sample_process(ps.unit_interval_space(9.0), ROOT.child("trim"), with_points=True)
    kept = ps.trim(sample, 1.0, ROOT.child("trim-all"))
    assert np.array_equal(kept.points, sample.points)
    gone = ps.trim(sample, 0.0, ROOT.child("trim-none"))
    assert gone.points.size == 0 and int(gone.counts[0]) == 0


def test_trim_half_keeps_half_on_average():
    space = ps.unit_interval_space(10.0)
    total = 0
    paths = 5000
    for i in range(paths):
        sample = ps.sample_process(space, ROOT.child("trim-mc", i), with_points=True)
        total += int(ps.trim(sample, 0.5, ROOT.child("trim-coin", i)).counts[0])
    # thinned process is Poisson(5), so the path mean has se sqrt(5/paths)
    se = math.sqrt(5.0 / paths)
    assert abs(total / paths - 5.0) <= 4.0 * se


def test_trim_validation():
    sample = ps.sample_process(ps.unit_interval_space(), ROOT.child("trim-v"), with_points=True)
    with pytest.raises(ParameterError):
        ps.trim(sample, 1.5, ROOT.child("x"))
    bare = ps.sample_process(ps.unit_interval_space(), ROOT.child("trim-b"))
    with pytest.raises(ParameterError):
        ps.trim(bare, 0.5, ROOT.child("x"))


# ------------------------------------------------------------ first chaos


def test_first_chaos_example_law():
    paths = 20000
    sim = ps.simulate_first_chaos_example(paths, ROOT.child("fc"))
    assert sim.all_stabilized()
    assert sim.paths == paths
    for n in (1, 2, 3, 5, 10, 30, 100):
        want = math.exp(-1.0 / n)
        se = math.sqrt(max(want * (1.0 - want), 1.0 / paths) / paths)
        assert abs(sim.empirical_cdf(n) - want) <= 4.0 * se


def test_first_chaos_example_repeatable():
    a = ps.simulate_first_chaos_example(500, ROOT.child("fc-rep"))
    b = ps.simulate_first_chaos_example(500, ROOT.child("fc-rep"))
    assert np.array_equal(a.stabilization, b.stabilization)
    with pytest.raises(ParameterError):
        ps.simulate_first_chaos_example(0, ROOT.child("fc-bad"))


# ------------------------------------------------------------------- mehler


def make_functional(constant=2.5):
    space = ps.CellSpace((0.7, 1.3, 2.0, 0.4))
    k1 = kernel_from_entries(space, 1, {(0,): 1.0, (2,): -0.5})
    k2 = kernel_from_entries(space, 2, {(0, 1): 0.8, (1, 3): -0.3})
    return ps.PoissonFunctional(space, constant, (k1, k2))


def test_functional_validation():
    space = ps.CellSpace((1.0, 2.0))
    degree0 = kernel_from_entries(space, 0, {(): 1.0})
    with pytest.raises(ParameterError):
        ps.PoissonFunctional(space, 0.0, (degree0,))
    other = kernel_from_entries(ps.CellSpace((1.0, 1.0)), 1, {(0,): 1.0})
    with pytest.raises(ParameterError):
        ps.PoissonFunctional(space, 0.0, (other,))


def test_functional_value_batch():
    f = make_functional()
    counts = ps.sample_counts(f.space, ROOT.child("fv"), 20)
    values = f.value_batch(counts)
    for i in range(20):
        want = f.constant + math.fsum(
            ps.multiple_integral(k, ps.PoissonSample(f.space, counts[i])) for k in f.kernels
        )
        assert values[i] == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_mehler_identity_at_one():
    report = ps.mehler_apply(make_functional(), 1.0, ROOT.child("m1"), 16, 512)
    assert report["max_deviation"] == 0.0


def test_mehler_projects_to_mean_at_zero():
    report = ps.mehler_apply(make_functional(), 0.0, ROOT.child("m0"), 16, 4096)
    assert report["max_normalized"] <= 1.0


def test_mehler_interpolates():
    report = ps.mehler_apply(make_functional(), 0.5, ROOT.child("mh"), 16, 4096)
    assert report["max_normalized"] <= 1.0
    again = ps.mehler_apply(make_functional(), 0.5, ROOT.child("mh"), 16, 4096)
    assert again["max_deviation"] == report["max_deviation"]


def test_mehler_validation():
    f = make_functional()
    with pytest.raises(ParameterError):
        ps.mehler_apply(f, -0.1, ROOT.child("mv"))
    with pytest.raises(ParameterError):
        ps.mehler_apply(f, 0.5, ROOT.child("mv"), 0, 10)
