"""Brute-force reference implementations used to check the fast paths.

Everything here trades speed for obviousness: dense grids instead of
closed forms, full refits instead of incremental updates, linear scans
instead of tree descent. Tests compare the library against these.
"""

from __future__ import annotations

import numpy as np

from mondrian_forest import (
    Dataset,
    LossSpec,
    PartitionTree,
    ValueBox,
    contains,
    empirical_risk,
    fit_tree,
    leaves_at,
    loss_eval,
    split_times,
)


def grid_minimum(spec: LossSpec, ys, box: ValueBox,
                 points: int = 100_000) -> tuple[float, float]:
    """Minimize the summed leaf loss over a dense grid of candidate values.

    Returns (argmin, min) over `points` evenly spaced values in the box.
    """
    values = np.linspace(box.lo, box.hi, points)
    ys = np.asarray(ys, dtype=float)
    total = np.zeros(points)
    for y in ys:
        total += loss_eval(spec, values, y)
    best = int(np.argmin(total))
    return float(values[best]), float(total[best])


def leaf_loss_sum(spec: LossSpec, value: float, ys) -> float:
    """Plain-Python loop computing the summed leaf loss at one value."""
    total = 0.0
    for y in np.asarray(ys, dtype=float):
        total += float(loss_eval(spec, value, float(y)))
    return total


def brute_force_path(partition: PartitionTree, data: Dataset, spec: LossSpec,
                     box: ValueBox, alpha: float):
    """Refit the whole tree from scratch at every breakpoint.

    Returns (breakpoints, risks, lambda_star) with the same smallest-
    lambda tie-breaking used by the incremental path.
    """
    breakpoints = [0.0] + [t for t in split_times(partition)
                           if t <= partition.horizon]
    risks = []
    for lam in breakpoints:
        fitted = fit_tree(partition, lam, data, spec, box)
        risks.append(empirical_risk(fitted, data, spec))
    totals = np.asarray(risks) + alpha * np.asarray(breakpoints)
    lambda_star = breakpoints[int(np.argmin(totals))]
    return np.asarray(breakpoints), np.asarray(risks), float(lambda_star)


def locate_scan(tree: PartitionTree, lam: float, x) -> int:
    """Find the unique leaf containing x by scanning every leaf cell."""
    hits = [i for i, cell in enumerate(leaves_at(tree, lam))
            if contains(cell, x)]
    if len(hits) != 1:
        raise AssertionError(f"point {x!r} hit {len(hits)} leaves")
    return hits[0]


def density_opt_reference(counts, vols, n: int, box: ValueBox) -> float:
    """Best box-constrained density objective found by scipy's L-BFGS-B.

    Runs several starts and returns the smallest objective seen.
    """
    from scipy.optimize import minimize

    from mondrian_forest.density import density_objective

    counts = np.asarray(counts, dtype=float)
    vols = np.asarray(vols, dtype=float)
    k = counts.shape[0]
    bounds = [(box.lo, box.hi)] * k
    starts = [np.zeros(k), np.full(k, box.lo), np.full(k, box.hi)]
    with np.errstate(divide="ignore"):
        ratio = np.log(np.maximum(counts, 0.5) / (n * vols))
    starts.append(np.clip(ratio, box.lo, box.hi))
    best = np.inf
    for start in starts:
        res = minimize(density_objective, start, args=(counts, vols, n),
                       method="L-BFGS-B", bounds=bounds,
                       options={"ftol": 1e-16, "gtol": 1e-12, "maxiter": 5000})
        best = min(best, float(res.fun))
    return best
