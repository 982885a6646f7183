"""Almost-sure-convergence diagnostics for path ensembles.

The input is a (paths, m) array of trajectories Z_1..Z_m.  The Cauchy
mode estimates n -> sup over windows [n, m'] of P(max |Z_l - Z_m'| > eps),
which vanishes as n grows iff the paths settle.  The zero-reference mode
measures distance from the constant limit 0 instead; this is the right
probe when a sequence settles, but away from the decomposition limit.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError

__all__ = ["as_convergence_diagnostic"]


def as_convergence_diagnostic(
    trajectories: np.ndarray,
    eps_levels=(0.05, 0.1, 0.2),
    reference: str = "final",
) -> dict:
    """Empirical tail curves, one per epsilon, with binomial SE bands.

    curves[eps][n-1] is, in Cauchy mode ("final"), the largest over
    m' >= n of the empirical P(max_{n<=l<=m'} |Z_l - Z_{m'}| > eps); in
    zero mode, P(max_{l>=n} |Z_l| > eps).  Both are nonincreasing in n.
    """
    traj = np.asarray(trajectories, dtype=float)
    if traj.ndim != 2 or traj.shape[0] < 1 or traj.shape[1] < 1:
        raise ParameterError("need a (paths, m) trajectory array")
    eps_levels = tuple(float(e) for e in eps_levels)
    if not eps_levels or any(e <= 0 for e in eps_levels):
        raise ParameterError("epsilon levels must be positive")
    if reference not in ("final", "zero"):
        raise ParameterError("reference must be 'final' or 'zero'")
    paths, m = traj.shape
    curves: dict[float, np.ndarray] = {}
    if reference == "zero":
        # suffix max of |Z| per path, then threshold
        suffix_max = np.maximum.accumulate(np.abs(traj)[:, ::-1], axis=1)[:, ::-1]
        for eps in eps_levels:
            curves[eps] = np.mean(suffix_max > eps, axis=0)
    else:
        probs = {eps: np.zeros(m) for eps in eps_levels}
        for end in range(m):
            # window maxima of |Z_l - Z_end| for every start n <= end
            diffs = np.abs(traj[:, : end + 1] - traj[:, end : end + 1])
            win_max = np.maximum.accumulate(diffs[:, ::-1], axis=1)[:, ::-1]
            for eps in eps_levels:
                row = np.mean(win_max > eps, axis=0)
                cur = probs[eps]
                cur[: end + 1] = np.maximum(cur[: end + 1], row)
        curves = probs
    ses = {
        eps: np.sqrt(curve * (1.0 - curve) / paths) for eps, curve in curves.items()
    }
    return {
        "paths": paths,
        "m": m,
        "eps_levels": eps_levels,
        "reference": reference,
        "curves": curves,
        "standard_errors": ses,
    }
