"""Named experiments and the config-driven dispatcher.

Each experiment maps (params, stream) to metric records; the runner
wraps them into reports keyed by a canonical config hash.  Streams hang
off the root seed by experiment name, so adding experiments to a config
never perturbs the draws of existing ones.

Ratio-style metrics ("deviation over SE" and similar) are reported on
the unit-SE scale: the recorded standard error is 1.0 by construction.
"""

from __future__ import annotations

import json
import math
import time
from fractions import Fraction
from importlib import resources

import numpy as np

from .. import distributions as dists
from .. import tensors as tns
from ..cdp import (
    build_iid_counterexample_schedule,
    cdp_ratio,
    check_iid_cdp,
    default_t_grid,
    schedule_bounds_exact,
    simulate_schedule,
    simulate_two_point_counterexample,
)
from ..chaos import (
    chaos_from_parts,
    evaluate,
    evaluate_decoupled_on_matrices,
    evaluate_on_matrix,
)
from ..errors import ConfigError
from ..poisson import (
    CellSpace,
    PoissonFunctional,
    StepKernel,
    mehler_apply,
    multiple_integral,
    multiple_integral_batch,
    integral_second_moment_exact,
    sample_counts,
    sample_process,
    simulate_first_chaos_example,
    wiener_ito_explicit,
)
from ..streams import Stream
from .diagnostics import as_convergence_diagnostic
from .enumeration import (
    enumerated_cross_moment,
    enumerated_second_moment,
    exact_tail,
    exact_values,
    exact_decoupled_values,
    min_decoupling_constant,
    reverse_triangle_check,
    sum_h_kernel,
)
from .reports import SCHEMA_VERSION, ExperimentReport, MetricRecord, config_hash_of

__all__ = [
    "available_experiments",
    "experiment_defaults",
    "run_config",
    "load_bundled_config",
]

_REGISTRY: dict = {}


def _register(name, defaults):
    def deco(fn):
        _REGISTRY[name] = (fn, defaults)
        return fn

    return deco


def available_experiments() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def experiment_defaults(name: str) -> dict:
    """Default parameters of a registered experiment (a fresh copy)."""
    if name not in _REGISTRY:
        raise ConfigError(f"unknown experiment '{name}'")
    return dict(_REGISTRY[name][1])


def _exact(name, value, verdict="info"):
    return MetricRecord(name, value, exact=True, verdict=verdict)


def _stoch(name, value, se, verdict="info"):
    return MetricRecord(name, value, standard_error=se, verdict=verdict)


def _unit(name, value, verdict):
    # normalized deviation; unit SE by construction
    return MetricRecord(name, value, standard_error=1.0, verdict=verdict)


def _ok(cond) -> str:
    return "pass" if cond else "fail"


# ---------------------------------------------------------------- cdp-scan


def _scan_families(ps):
    fams = [
        ("gaussian", dists.gaussian(0.0, 1.0), 1.0),
        ("rademacher", dists.rademacher(), 1.0),
        ("uniform", dists.uniform(-math.sqrt(3.0), math.sqrt(3.0)), 1.0),
    ]
    for p in ps:
        dist = dists.two_point(float(p))
        # keep the whole grid below 1/max|atom| so the truncation never
        # splits the atoms and the truncated mean stays exactly zero
        t_max = (1.0 - 1e-9) / dists.support_bound(dist)
        fams.append((f"two-point-{float(p):g}", dist, min(1.0, t_max)))
    return fams


@_register(
    "cdp-scan",
    {
        "c_max": 1000.0,
        "grid_points": 64,
        "two_point_ps": [0.2, 0.5, 0.8],
        "heavy_n_max": 200,
        "monotone_lo": 10,
        "monotone_hi": 35,
        "extra_families": [],
    },
)
def _cdp_scan(params, stream):
    del stream  # fully deterministic
    c_max = float(params["c_max"])
    points = int(params["grid_points"])
    metrics = []
    for name, dist, t_max in _scan_families(params["two_point_ps"]):
        grid = default_t_grid(dist, t_max=t_max, points=points)
        res = check_iid_cdp(dist, t_grid=grid, c_max=c_max)
        metrics.append(
            _exact(
                f"{name}/witness_c",
                res.witness_c,
                _ok(res.holds and res.witness_c == 0.0),
            )
        )
        t_half = dists.variance_half_threshold(dist)
        wide = default_t_grid(dist, t_max=1.0, points=points)
        small_max = max(
            (cdp_ratio(dist, t) for t in wide if t <= t_half), default=0.0
        )
        bound = max(2.0, 2.0 * t_half * t_half)
        metrics.append(_exact(f"{name}/half_variance_t", t_half))
        metrics.append(
            _exact(f"{name}/small_t_ratio_max", small_max, _ok(small_max <= bound))
        )
        metrics.append(
            _exact(f"{name}/unrestricted_ratio_max", max(cdp_ratio(dist, t) for t in wide))
        )
    heavy = dists.heavy_tailed_example(int(params["heavy_n_max"]))
    hres = check_iid_cdp(heavy, c_max=c_max)
    metrics.append(_exact("heavy/max_grid_ratio", hres.witness_c))
    metrics.append(_exact("heavy/grid_size", float(len(hres.t_grid))))
    lo, hi = int(params["monotone_lo"]), int(params["monotone_hi"])
    ratios = [cdp_ratio(heavy, (m * m) / (2.0**m)) for m in range(lo, hi + 1)]
    monotone = all(b > a for a, b in zip(ratios, ratios[1:]))
    metrics.append(_exact("heavy/ratio_monotone", float(monotone), _ok(monotone)))
    metrics.append(_exact("heavy/ratio_first", ratios[0]))
    metrics.append(_exact("heavy/ratio_last", ratios[-1]))
    for i, record in enumerate(params["extra_families"]):
        dist = dists.from_record(record)
        res = check_iid_cdp(dist, c_max=c_max)
        metrics.append(_exact(f"extra-{i}/witness_c", res.witness_c, _ok(res.holds)))
    return metrics


# ------------------------------------------------------- counterexample-iid


def _binomial_sum_exceedance(m: int, eps: float) -> float:
    """Exact P(|(2K - m)/sqrt(m) - 1| > eps) for K ~ Binomial(m, 1/2)."""
    root = math.sqrt(m)
    lo = math.ceil((m + (1.0 - eps) * root) / 2.0)
    hi = math.floor((m + (1.0 + eps) * root) / 2.0)
    inside = sum(math.comb(m, k) for k in range(max(lo, 0), min(hi, m) + 1))
    return float(1 - Fraction(inside, 2**m))


@_register(
    "counterexample-iid",
    {
        "heavy_n_max": 200,
        "build_lo": 1,
        "build_hi": 25,
        "check_lo": 10,
        "check_hi": 25,
        "paths": 10000,
        "k_cap": 1000000,
        "eps_levels": [0.05, 0.1, 0.2],
        "exceedance_eps": 0.1,
        "exceedance_fixture": 0.8,
        "control_m": 4096,
        "control_floor": 0.9,
    },
)
def _counterexample_iid(params, stream):
    dist = dists.heavy_tailed_example(int(params["heavy_n_max"]))
    sched = build_iid_counterexample_schedule(
        dist, int(params["build_lo"]), int(params["build_hi"])
    )
    metrics = [_exact("schedule/stages", float(len(sched.ns)))]
    lo, hi = int(params["check_lo"]), int(params["check_hi"])
    bounds = schedule_bounds_exact(sched)
    a_ok = b_ok = True
    a_dev = Fraction(0)
    bn_max = Fraction(0)
    for n, t, a, (a_val, b_val) in zip(
        sched.ns, sched.t_values, sched.a_values, bounds
    ):
        if not lo <= n <= hi:
            continue
        tm = dists.truncated_mean(dist, 1.0 / abs(a))
        window = 2 * Fraction(t) * abs(Fraction(tm))
        a_ok = a_ok and abs(a_val - 1) <= window
        b_ok = b_ok and b_val < Fraction(1, n)
        a_dev = max(a_dev, abs(a_val - 1))
        bn_max = max(bn_max, b_val * n)
    metrics.append(_exact("schedule/a_window_holds", float(a_ok), _ok(a_ok)))
    metrics.append(_exact("schedule/b_bound_holds", float(b_ok), _ok(b_ok)))
    metrics.append(_exact("schedule/max_abs_a_minus_1", float(a_dev)))
    metrics.append(_exact("schedule/max_n_times_b", float(bn_max)))

    k_cap = int(params["k_cap"])
    feasible = [n for n, k in zip(sched.ns, sched.k_values) if k <= k_cap]
    if not feasible:
        raise ConfigError("no schedule stage fits under k_cap")
    n_star = max(feasible)
    eps_levels = [float(e) for e in params["eps_levels"]]
    eps_star = float(params["exceedance_eps"])
    if eps_star not in eps_levels:
        eps_levels.append(eps_star)
    sim = simulate_schedule(
        sched, n_star, int(params["paths"]), stream, eps_levels=tuple(eps_levels)
    )
    metrics.append(_exact("mc/stage_n", float(n_star)))
    metrics.append(_exact("mc/stage_copies", float(sim["k_n"] + 1)))
    var = sim["variance"]
    metrics.append(
        _stoch("mc/mean", sim["mean"], math.sqrt(var / sim["paths"]))
    )
    fixture = float(params["exceedance_fixture"])
    for eps in eps_levels:
        verdict = _ok(sim["exceedance"][eps] <= fixture) if eps == eps_star else "info"
        metrics.append(
            _stoch(
                f"mc/exceedance_eps{eps:g}",
                sim["exceedance"][eps],
                sim["standard_error"][eps],
                verdict,
            )
        )

    m = int(params["control_m"])
    exact_exc = _binomial_sum_exceedance(m, eps_star)
    gen = stream.child("control").generator()
    heads = gen.binomial(m, 0.5, size=int(params["paths"]))
    sums = (2.0 * heads - m) / math.sqrt(m)
    exc = float(np.mean(np.abs(sums - 1.0) > eps_star))
    se = math.sqrt(max(exact_exc * (1.0 - exact_exc), 1.0 / sim["paths"]) / sim["paths"])
    metrics.append(_exact("control/exact_exceedance", exact_exc))
    metrics.append(
        _stoch("control/exceedance", exc, se, _ok(exc >= float(params["control_floor"])))
    )
    metrics.append(
        _unit("control/mc_dev_over_se", abs(exc - exact_exc) / se, _ok(abs(exc - exact_exc) <= 4 * se))
    )
    return metrics


# ------------------------------------------------- counterexample-two-point


@_register(
    "counterexample-two-point",
    {
        "n_max": 30,
        "paths": 10000,
        "se_check_n": 20,
        "stab_n": 20,
        "stab_floor": 0.99,
        "eps": 0.5,
        "curve_floor": 0.9,
        "tail_ceiling": 0.01,
    },
)
def _counterexample_two_point(params, stream):
    n_max = int(params["n_max"])
    paths = int(params["paths"])
    tp = simulate_two_point_counterexample(
        lambda n: 1.0 - 2.0 ** (-n), n_max, paths, stream
    )
    metrics = []
    worst = 0.0
    for n in range(1, int(params["se_check_n"]) + 1):
        p = 1.0 - 2.0 ** (-n)
        se = math.sqrt(p * (1.0 - p) / paths)
        worst = max(worst, abs(tp.hit_probability(n) - p) / se)
    metrics.append(_unit("hits/max_dev_over_se", worst, _ok(worst <= 4.0)))

    stab_n = int(params["stab_n"])
    frac = float(np.mean(tp.stabilization_indices() <= stab_n))
    se = math.sqrt(max(frac * (1 - frac), 1.0 / paths) / paths)
    metrics.append(
        _stoch("stabilized/fraction", frac, se, _ok(frac >= float(params["stab_floor"])))
    )

    eps = float(params["eps"])
    zero_full = as_convergence_diagnostic(tp.full, (eps,), reference="zero")
    curve = zero_full["curves"][eps]
    ses = zero_full["standard_errors"][eps]
    idx = min(stab_n, n_max) - 1
    metrics.append(_stoch("full/tail_initial", float(curve[0]), float(max(ses[0], 1.0 / paths))))
    metrics.append(
        _stoch(
            "full/tail_at_stab",
            float(curve[idx]),
            float(max(ses[idx], 1.0 / paths)),
            _ok(curve[idx] <= float(params["tail_ceiling"])),
        )
    )
    cauchy_full = as_convergence_diagnostic(tp.full, (eps,), reference="final")
    ccurve = cauchy_full["curves"][eps]
    metrics.append(
        _stoch(
            "full/cauchy_at_stab",
            float(ccurve[idx]),
            float(max(cauchy_full["standard_errors"][eps][idx], 1.0 / paths)),
            _ok(ccurve[idx] <= float(params["tail_ceiling"])),
        )
    )
    zero_lin = as_convergence_diagnostic(tp.linear, (eps,), reference="zero")
    lin_min = float(np.min(zero_lin["curves"][eps]))
    lin_se = float(np.max(zero_lin["standard_errors"][eps]))
    metrics.append(
        _stoch(
            "linear/tail_min",
            lin_min,
            max(lin_se, 1.0 / paths),
            _ok(lin_min >= float(params["curve_floor"])),
        )
    )
    return metrics


# --------------------------------------------------------- decoupling-certify


def _random_mixed_chaos(degree, ambient, support, stream, include_constant=True):
    parts = []
    for k in range(0 if include_constant else 1, degree + 1):
        size = min(support, math.comb(ambient, k))
        parts.append(
            tns.random_tensor(
                k, ambient, size, dists.gaussian(0.0, 1.0), stream.child("part", k)
            )
        )
    return chaos_from_parts(parts, degree=degree, ambient_n=ambient)


def _magnitude_grid(c, points):
    mags = np.abs(np.concatenate([exact_values(c), exact_decoupled_values(c)]))
    positive = np.unique(mags[mags > 0])
    if positive.size == 0:
        return np.array([1.0])
    return np.geomspace(positive[0], positive[-1] * 1.25, points)


@_register(
    "decoupling-certify",
    {
        "instances": 20,
        "n_lo": 4,
        "n_hi": 10,
        "support": 8,
        "c_cap": 10000.0,
        "c_fixture": 50.0,
        "grid_points": 12,
        "recoupling_trials": 250,
        "recoupling_d_max": 4,
        "recoupling_n": 8,
        "recoupling_tol": 1e-9,
        "h_instances": 50,
        "h_n_max": 7,
        "h_d_max": 3,
        "h_tol": 1e-9,
        "mc_instances": 10,
        "mc_paths": 20000,
        "tensors": [],
    },
)
def _decoupling_certify(params, stream):
    metrics = []
    if params["tensors"]:
        instances = [tns.from_record(r) for r in params["tensors"]]
    else:
        n_lo, n_hi = int(params["n_lo"]), int(params["n_hi"])
        instances = []
        for i in range(int(params["instances"])):
            n = n_lo + i % (n_hi - n_lo + 1)
            instances.append(
                tns.random_tensor(
                    2,
                    n,
                    min(int(params["support"]), math.comb(n, 2)),
                    dists.gaussian(0.0, 1.0),
                    stream.child("instance", i),
                )
            )
    forward = []
    reverse = []
    for tensor in instances:
        c = chaos_from_parts([tensor])
        grid = _magnitude_grid(c, int(params["grid_points"]))
        forward.append(
            min_decoupling_constant(c, grid, "forward", float(params["c_cap"]))
        )
        reverse.append(
            min_decoupling_constant(c, grid, "reverse", float(params["c_cap"]))
        )
    fixture = float(params["c_fixture"])
    metrics.append(_exact("certify/instances", float(len(instances))))
    metrics.append(
        _exact("certify/c_forward_max", max(forward), _ok(max(forward) <= fixture))
    )
    metrics.append(
        _exact("certify/c_reverse_max", max(reverse), _ok(max(reverse) <= fixture))
    )
    metrics.append(_exact("certify/c_forward_mean", float(np.mean(forward))))
    metrics.append(_exact("certify/c_reverse_mean", float(np.mean(reverse))))

    worst = 0.0
    trials = int(params["recoupling_trials"])
    n = int(params["recoupling_n"])
    for d in range(1, int(params["recoupling_d_max"]) + 1):
        c = _random_mixed_chaos(d, n, 6, stream.child("recouple", d))
        x = dists.sample(
            dists.gaussian(0.0, 1.0), stream.child("recouple-args", d), trials * n
        ).reshape(trials, n)
        direct = evaluate_on_matrix(c, x)
        dec = evaluate_decoupled_on_matrices(c, [x] * d)
        scale = max(1.0, float(np.max(np.abs(direct))))
        worst = max(worst, float(np.max(np.abs(direct - dec))) / scale)
    metrics.append(
        _exact(
            "recoupling/max_scaled_err", worst, _ok(worst <= float(params["recoupling_tol"]))
        )
    )

    worst_h = 0.0
    h_d_max, h_n_max = int(params["h_d_max"]), int(params["h_n_max"])
    for i in range(int(params["h_instances"])):
        d = 1 + i % h_d_max
        n_i = max(d, 3 + i % (h_n_max - 2))
        c = _random_mixed_chaos(d, n_i, 4, stream.child("h-instance", i))
        x = dists.sample(dists.gaussian(0.0, 1.0), stream.child("h-args", i), n_i)
        direct = evaluate(c, x)
        recon = sum_h_kernel(c, x)
        worst_h = max(worst_h, abs(recon - direct) / max(1.0, abs(direct)))
    metrics.append(
        _exact("h_kernel/max_scaled_err", worst_h, _ok(worst_h <= float(params["h_tol"])))
    )

    worst_mc = 0.0
    mc_paths = int(params["mc_paths"])
    for i in range(int(params["mc_instances"])):
        n_i = 4 + i % 7
        c = chaos_from_parts(
            [
                tns.random_tensor(
                    2,
                    n_i,
                    min(6, math.comb(n_i, 2)),
                    dists.gaussian(0.0, 1.0),
                    stream.child("mc-instance", i),
                )
            ]
        )
        mags = np.unique(np.abs(exact_values(c)))
        if mags.size < 2:
            continue
        thr = float(mags[mags.size // 2])
        p_exact = exact_tail(c, thr)
        signs = dists.sample(
            dists.rademacher(), stream.child("mc-signs", i), mc_paths * n_i
        ).reshape(mc_paths, n_i)
        est = float(np.mean(np.abs(evaluate_on_matrix(c, signs)) >= thr))
        se = math.sqrt(p_exact * (1.0 - p_exact) / mc_paths)
        worst_mc = max(worst_mc, abs(est - p_exact) / se)
    metrics.append(_unit("mc_agreement/max_dev_over_se", worst_mc, _ok(worst_mc <= 4.0)))
    return metrics


# ----------------------------------------------------------- reverse-triangle


@_register(
    "reverse-triangle",
    {
        "instances": 50,
        "d_max": 4,
        "n": 10,
        "support": 6,
        "enum_instances": 8,
        "enum_n": 10,
        "enum_tol": 1e-12,
        "ratio_slack": 1e-12,
    },
)
def _reverse_triangle(params, stream):
    metrics = []
    n = int(params["n"])
    worst_ratio = 0.0
    for i in range(int(params["instances"])):
        d = 1 + i % int(params["d_max"])
        c = _random_mixed_chaos(d, n, int(params["support"]), stream.child("instance", i))
        _, _, ratio = reverse_triangle_check(c)
        worst_ratio = max(worst_ratio, ratio / math.sqrt(d + 1.0))
    slack = 1.0 + float(params["ratio_slack"])
    metrics.append(
        _exact("rt/max_ratio_over_bound", worst_ratio, _ok(worst_ratio <= slack))
    )

    enum_n = int(params["enum_n"])
    worst_rel = 0.0
    worst_cross = 0.0
    for j in range(int(params["enum_instances"])):
        d = 1 + j % 3
        c = _random_mixed_chaos(d, enum_n, 4, stream.child("enum", j))
        _, rhs, _ = reverse_triangle_check(c)
        enum_m2 = enumerated_second_moment(c)
        worst_rel = max(worst_rel, abs(enum_m2 - rhs * rhs) / max(rhs * rhs, 1e-300))
        # cross moments of distinct-degree parts vanish; sign-flip pairing
        # cancels odd pairs exactly, even pairs only up to rounding
        singles = [
            chaos_from_parts([part], degree=c.degree, ambient_n=enum_n)
            for part in c.parts
        ]
        for a in range(d + 1):
            for b in range(a + 1, d + 1):
                cross = enumerated_cross_moment(singles[a], singles[b])
                scale = max(
                    1.0,
                    math.sqrt(enumerated_second_moment(singles[a]))
                    * math.sqrt(enumerated_second_moment(singles[b])),
                )
                worst_cross = max(worst_cross, abs(cross) / scale)
    tol = float(params["enum_tol"])
    metrics.append(_exact("rt/enum_moment_max_rel_err", worst_rel, _ok(worst_rel <= tol)))
    metrics.append(_exact("rt/enum_cross_max_scaled", worst_cross, _ok(worst_cross <= tol)))
    return metrics


# ------------------------------------------------------------ poisson-example


@_register(
    "poisson-example",
    {"paths": 10000, "checkpoints": [1, 2, 3, 5, 10, 30, 100]},
)
def _poisson_example(params, stream):
    paths = int(params["paths"])
    fc = simulate_first_chaos_example(paths, stream)
    metrics = []
    stabilized = float(fc.all_stabilized())
    metrics.append(_exact("example/all_stabilized", stabilized, _ok(stabilized == 1.0)))
    worst = 0.0
    for n in params["checkpoints"]:
        target = math.exp(-1.0 / float(n))
        se = math.sqrt(target * (1.0 - target) / paths)
        worst = max(worst, abs(fc.empirical_cdf(int(n)) - target) / se)
    metrics.append(_unit("example/max_cdf_dev_over_se", worst, _ok(worst <= 4.0)))
    idx = fc.stabilization
    metrics.append(
        _stoch(
            "example/mean_index",
            float(np.mean(idx)),
            float(np.std(idx, ddof=1) / math.sqrt(paths)),
        )
    )
    return metrics


# ----------------------------------------------------------- poisson-isometry


@_register(
    "poisson-isometry",
    {
        "kernels": 20,
        "k_max": 3,
        "mc_paths": 100000,
        "support": 5,
        "identity_samples": 5,
        "identity_tol": 1e-9,
        "rates": [[0.7, 1.3, 2.0, 0.4], [1.0, 0.5, 1.5], [2.0, 1.0]],
    },
)
def _poisson_isometry(params, stream):
    spaces = [CellSpace(tuple(float(r) for r in row)) for row in params["rates"]]
    mc_paths = int(params["mc_paths"])
    counts = {
        s: sample_counts(space, stream.child("counts", s), mc_paths)
        for s, space in enumerate(spaces)
    }
    worst_id = 0.0
    worst_iso = 0.0
    worst_cross = 0.0
    by_space_vals: dict = {}
    for i in range(int(params["kernels"])):
        s = i % len(spaces)
        space = spaces[s]
        k = 1 + i % min(int(params["k_max"]), space.size)
        tensor = tns.random_tensor(
            k,
            space.size,
            min(int(params["support"]), math.comb(space.size, k)),
            dists.gaussian(0.0, 1.0),
            stream.child("kernel", i),
        )
        kern = StepKernel(space, tensor)
        for j in range(int(params["identity_samples"])):
            smp = sample_process(space, stream.child("identity", i, j))
            a = multiple_integral(kern, smp)
            b = wiener_ito_explicit(kern, smp)
            worst_id = max(worst_id, abs(a - b) / max(1.0, abs(a)))
        vals = multiple_integral_batch(kern, counts[s])
        target = integral_second_moment_exact(kern)
        sq = vals * vals
        se = float(np.std(sq, ddof=1)) / math.sqrt(mc_paths)
        worst_iso = max(worst_iso, abs(float(np.mean(sq)) - target) / se)
        prev = by_space_vals.get(s)
        if prev is not None and prev[0] != k:
            prod = prev[1] * vals
            cross_se = float(np.std(prod, ddof=1)) / math.sqrt(mc_paths)
            worst_cross = max(worst_cross, abs(float(np.mean(prod))) / cross_se)
        by_space_vals[s] = (k, vals)
    metrics = [
        _exact(
            "identity/max_scaled_err",
            worst_id,
            _ok(worst_id <= float(params["identity_tol"])),
        ),
        _unit("isometry/max_dev_over_se", worst_iso, _ok(worst_iso <= 4.0)),
        _unit("orthogonality/max_dev_over_se", worst_cross, _ok(worst_cross <= 4.0)),
    ]
    return metrics


# -------------------------------------------------------------------- mehler


@_register(
    "mehler",
    {
        "t_values": [0.0, 0.25, 0.5, 1.0],
        "outer_paths": 64,
        "inner_paths": 4096,
        "rates": [0.7, 1.3, 2.0, 0.4],
        "constant": 2.5,
        "support_1": 3,
        "support_2": 4,
    },
)
def _mehler(params, stream):
    space = CellSpace(tuple(float(r) for r in params["rates"]))
    m = space.size
    k1 = StepKernel(
        space,
        tns.random_tensor(
            1, m, min(int(params["support_1"]), m), dists.gaussian(0.0, 1.0),
            stream.child("kernel", 1),
        ),
    )
    k2 = StepKernel(
        space,
        tns.random_tensor(
            2, m, min(int(params["support_2"]), math.comb(m, 2)),
            dists.gaussian(0.0, 1.0), stream.child("kernel", 2),
        ),
    )
    functional = PoissonFunctional(space, float(params["constant"]), (k1, k2))
    metrics = []
    for idx, t in enumerate(float(v) for v in params["t_values"]):
        result = mehler_apply(
            functional,
            t,
            stream.child("t", idx),
            outer_paths=int(params["outer_paths"]),
            inner_paths=int(params["inner_paths"]),
        )
        tag = f"{t:g}"
        if t == 1.0:
            metrics.append(
                _exact(
                    f"mehler/max_deviation_t{tag}",
                    result["max_deviation"],
                    _ok(result["max_deviation"] == 0.0),
                )
            )
        else:
            within = float(
                np.mean(result["deviations"] <= 4.0 * result["inner_standard_errors"])
            )
            se = math.sqrt(
                max(within * (1 - within), 1.0 / result["outer_paths"])
                / result["outer_paths"]
            )
            metrics.append(
                _stoch(f"mehler/within_4se_t{tag}", within, se, _ok(within == 1.0))
            )
            metrics.append(
                _unit(
                    f"mehler/max_norm_dev_t{tag}",
                    result["max_normalized"],
                    _ok(result["max_normalized"] <= 1.0),
                )
            )
    return metrics


# ------------------------------------------------------------------- runner


def _merge_params(defaults: dict, overrides: dict) -> dict:
    merged = dict(defaults)
    for key, value in overrides.items():
        if key not in defaults:
            raise ConfigError(f"unknown parameter '{key}'")
        merged[key] = value
    return merged


_RETRY_KEYS = ("paths", "mc_paths", "inner_paths")


def _retry_params(params: dict) -> dict | None:
    if not any(key in params for key in _RETRY_KEYS):
        return None
    return {
        key: 4 * value if key in _RETRY_KEYS else value
        for key, value in params.items()
    }


def run_config(config: dict) -> list[ExperimentReport]:
    """Execute every experiment named in the config; reports are pure
    functions of (config, seed).

    A 4-SE band trips by chance roughly 6e-5 of the time per metric,
    which compounds across a large suite.  When a run fails only on
    stochastic bands it is rerolled once, on a fresh substream with 4x
    the paths, before the failure is allowed to stand; exact-check
    failures are never retried.
    """
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    schema = config.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported config schema {schema!r}")
    if "seed" not in config or not isinstance(config["seed"], int):
        raise ConfigError("config must pin an integer seed")
    seed = config["seed"]
    entries = config.get("experiments")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("config needs a nonempty 'experiments' list")
    reports = []
    seen: dict[str, int] = {}
    for entry in entries:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError("each experiment entry needs a 'name'")
        name = entry["name"]
        if name not in _REGISTRY:
            known = ", ".join(sorted(_REGISTRY))
            raise ConfigError(f"unknown experiment '{name}' (known: {known})")
        fn, defaults = _REGISTRY[name]
        try:
            params = _merge_params(defaults, entry.get("params", {}))
        except ConfigError as exc:
            raise ConfigError(f"{name}: {exc}") from None
        occ = seen.get(name, 0)
        seen[name] = occ + 1
        stream = Stream(seed).child("experiment", name, occ)
        started = time.perf_counter()
        metrics = fn(params, stream)
        failures = [m for m in metrics if m.verdict == "fail"]
        if failures and all(not m.exact for m in failures):
            retry = _retry_params(params)
            if retry is not None:
                metrics = fn(retry, stream.child("retry"))
                metrics.append(_exact("runner/retried", 1.0))
        runtime = time.perf_counter() - started
        reports.append(
            ExperimentReport(
                experiment_id=name if occ == 0 else f"{name}#{occ}",
                config_hash=config_hash_of(
                    {"schema": SCHEMA_VERSION, "seed": seed, "name": name, "params": params}
                ),
                seed=seed,
                metrics=tuple(metrics),
                runtime_seconds=runtime,
            )
        )
    return reports


def load_bundled_config(name: str) -> dict:
    """Load a packaged config by bare name (e.g. 'paper-suite')."""
    path = resources.files("chaoslab").joinpath("configs", f"{name}.json")
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"no bundled config named '{name}'") from None
    return json.loads(text)
