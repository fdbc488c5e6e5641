"""Penalized stopping-time selection for individual trees.

For one partition genealogy, the in-sample risk of the fitted tree is a
piecewise-constant, non-increasing function of the horizon, jumping only
when a split is born. Adding the linear penalty ``alpha * lam`` makes the
objective increasing between jumps, so the exact minimizer over all
horizons lies on the finite set {0} U {split birth times}. The path walks
those events in birth order, replacing one leaf's risk contribution with
its two refitted children at each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    AutoLambda,
    Dataset,
    FitConfig,
    InputError,
    ResourceError,
    ValueBox,
)
from .forest import Forest, tree_streams
from .leaf_fit import fit_leaf
from .losses import LossSpec
from .partition import PartitionTree, SplitNode, sample_partition
from .tree import FittedTree, fit_tree

DEFAULT_ALPHA = 0.1


@dataclass(frozen=True)
class PenaltyPath:
    """Risk and penalty evaluated at every candidate horizon of one tree."""

    breakpoints: np.ndarray
    risks: np.ndarray
    alpha: float
    lambda_star: float

    @property
    def pen_totals(self) -> np.ndarray:
        return self.risks + self.alpha * self.breakpoints


def default_lambda_max(n: int, dimension: int) -> float:
    """Horizon at which the expected leaf count reaches the sample size."""
    if n < 1 or dimension < 1:
        raise InputError("lambda_max default requires n >= 1 and dimension >= 1")
    return max(n ** (1.0 / dimension) - 1.0, 0.0)


def penalty_path(partition: PartitionTree, data: Dataset, spec: LossSpec,
                 box: ValueBox, alpha: float) -> PenaltyPath:
    if not (np.isfinite(alpha) and 0.0 < alpha <= 1.0):
        raise InputError("alpha must lie in (0, 1]")
    if data.n < 1:
        raise InputError("penalty path requires at least one observation")
    if data.dimension != partition.dimension:
        raise InputError("data dimension does not match partition dimension")
    if spec.family == "density":
        raise InputError("penalty path is defined for supervised families")
    ys = data.require_responses()

    events: list[SplitNode] = []
    stack = [partition.root]
    while stack:
        node = stack.pop()
        if isinstance(node, SplitNode):
            events.append(node)
            stack.append(node.left)
            stack.append(node.right)
    events.sort(key=lambda nd: nd.birth_time)

    # per-active-leaf state: point indices and summed leaf loss
    all_idx = np.arange(data.n)
    member: dict[int, np.ndarray] = {id(partition.root): all_idx}
    loss_sum: dict[int, float] = {
        id(partition.root): fit_leaf(spec, ys, box).achieved_loss}

    breakpoints = [0.0]
    risks = [sum(loss_sum.values()) / data.n]
    for node in events:
        idx = member.pop(id(node))
        loss_sum.pop(id(node))
        go_left = data.points[idx, node.split_dim] < node.threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]
        member[id(node.left)] = left_idx
        member[id(node.right)] = right_idx
        loss_sum[id(node.left)] = fit_leaf(spec, ys[left_idx], box).achieved_loss
        loss_sum[id(node.right)] = fit_leaf(spec, ys[right_idx], box).achieved_loss
        breakpoints.append(node.birth_time)
        risks.append(sum(loss_sum.values()) / data.n)

    bp = np.asarray(breakpoints)
    rk = np.asarray(risks)
    # first occurrence of the minimum = smallest minimizing horizon
    lambda_star = float(bp[int(np.argmin(rk + alpha * bp))])
    return PenaltyPath(breakpoints=bp, risks=rk, alpha=alpha,
                       lambda_star=lambda_star)


def fit_forest_auto(data: Dataset, spec: LossSpec, config: FitConfig) -> Forest:
    """Fit a forest whose trees each select their own horizon by penalty.

    Every tree's genealogy is sampled up to ``lambda_max``; the tree is
    then pruned at its penalized-risk minimizer.
    """
    if not isinstance(config.lambda_mode, AutoLambda):
        raise InputError("fit_forest_auto requires AutoLambda mode")
    mode = config.lambda_mode
    streams = tree_streams(config.seed, config.tree_count)
    trees: list[FittedTree] = []
    for b, rng in enumerate(streams):
        try:
            partition = sample_partition(
                data.dimension, mode.lambda_max, rng, leaf_cap=config.leaf_cap,
                stream_id=f"{config.seed}/{b}")
        except ResourceError as exc:
            raise ResourceError(f"tree {b}: {exc}") from exc
        path = penalty_path(partition, data, spec, config.value_box, mode.alpha)
        trees.append(fit_tree(partition, path.lambda_star, data, spec,
                              config.value_box))
    return Forest(trees=tuple(trees), spec=spec, config=config)
