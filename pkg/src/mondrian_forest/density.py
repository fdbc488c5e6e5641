"""Log-density estimation with Mondrian-forest histograms.

Each tree fits box-constrained per-leaf log-heights by maximum likelihood
with a normalization penalty:

    minimize  -(1/n) sum_j c_j n_j + ln sum_j vol_j exp(c_j),   c_j in box.

The objective is invariant under adding one constant to all heights, so
the representative with unit mass (closed form ``c_j = ln(n_j/(n vol_j))``)
is taken, clamped into the box. When clamping binds, stationarity pins
every height to a common mass scale, c_j = clip(ln(n_j Z / (n vol_j))),
and the self-consistency equation for Z is piecewise linear between clamp
breakpoints, so the constrained minimizer is solved exactly by a
breakpoint scan; projected cyclic coordinate descent then certifies the
result (each coordinate has an exact minimizer, so no line search is
needed). Heights are then recentered so the piecewise-constant function
integrates to zero, trees are averaged, and the ensemble is exponentiated
and renormalized into a density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import qmc

from .core import (
    DEFAULT_LEAF_CAP,
    Cell,
    InputError,
    NumericError,
    ValueBox,
    as_point,
    as_points,
    volume,
)
from .partition import (
    PartitionTree,
    leaves_at,
    locate_batch,
    partition_from_obj,
    partition_to_obj,
    sample_partition,
)

DEFAULT_GRID_POINTS = 2**15

SERIAL_FORMAT = "mondrian-density-v1"


@dataclass(frozen=True)
class ExactOverlay:
    """Exact 1-d normalization over the union of all trees' breakpoints."""


@dataclass(frozen=True)
class GridMC:
    """Deterministic low-discrepancy integration grid for d >= 2."""

    point_count: int
    seed: int


@dataclass(frozen=True)
class DensityTree:
    partition: PartitionTree
    lam: float
    heights: np.ndarray  # recentered, indexed by leaf id at lam


@dataclass(frozen=True)
class DensityModel:
    trees: tuple[DensityTree, ...]
    log_normalizer: float
    integration: ExactOverlay | GridMC

    @property
    def dimension(self) -> int:
        return self.trees[0].partition.dimension


def fit_density_tree(partition: PartitionTree, lam: float, xs,
                     box: ValueBox) -> np.ndarray:
    """Per-leaf heights minimizing the penalized likelihood objective.

    Returned heights are NOT recentered; apply :func:`recenter`.
    """
    points = as_points(xs, dimension=partition.dimension)
    cells = leaves_at(partition, lam)
    vols = np.array([volume(c) for c in cells])
    if np.any(vols <= 0.0):
        raise NumericError("partition has a zero-volume leaf")
    n = points.shape[0]
    leaf_count = len(cells)
    counts = np.zeros(leaf_count, dtype=np.int64)
    if n:
        ids = locate_batch(partition, lam, points)
        counts = np.bincount(ids, minlength=leaf_count)

    if n == 0:
        return np.full(leaf_count, box.lo)

    # unit-mass stationary point, clamped into the box
    with np.errstate(divide="ignore"):
        heights = np.log(counts / (n * vols))
    heights = np.clip(heights, box.lo, box.hi)

    if not np.all((heights > box.lo) & (heights < box.hi)):
        heights = _scale_equation_heights(counts, vols, n, box)
        _coordinate_descent(heights, counts, vols, n, box)
    return heights


def _scale_equation_heights(counts: np.ndarray, vols: np.ndarray, n: int,
                            box: ValueBox) -> np.ndarray:
    """Exact box-constrained minimizer via the stationarity scale equation.

    At the optimum there is a total mass Z with heights
    c_j = clip(a_j + t, lo, hi) where a_j = ln(n_j / (n vol_j)) and t = ln Z.
    The residual R(t) = sum_j vol_j e^{c_j(t)} - e^t is continuous,
    nonincreasing, positive as t -> -inf and negative as t -> +inf, and
    linear in e^t between the breakpoints where a clamp engages or releases,
    so its first zero is found by scanning breakpoints in increasing order.
    Empty cells (a_j = -inf) stay clamped at the lower edge throughout.
    """
    p = counts / n
    with np.errstate(divide="ignore"):
        a = np.log(p / vols)
    lo_mass = vols * math.exp(box.lo)
    hi_mass = vols * math.exp(box.hi)
    events = []
    for j in range(vols.shape[0]):
        if np.isfinite(a[j]):
            events.append((box.lo - a[j], p[j], -lo_mass[j]))
            events.append((box.hi - a[j], -p[j], hi_mass[j]))
    events.sort(key=lambda event: event[0])
    interior = 0.0
    fixed = float(lo_mass.sum())
    t_prev = -math.inf
    for t_event, d_interior, d_fixed in events:
        if t_event > t_prev:
            residual = (interior - 1.0) * math.exp(t_event) + fixed
            if residual <= 0.0:
                if interior < 1.0:
                    # the root lies in this segment; clamping guards the
                    # closed form against rounding in the running sums
                    t_star = math.log(fixed / (1.0 - interior))
                    t_star = min(max(t_star, t_prev), t_event)
                else:
                    # flat stretch of zero residual; every point is optimal
                    t_star = t_prev
                return np.clip(a + t_star, box.lo, box.hi)
            t_prev = t_event
        interior += d_interior
        fixed += d_fixed
    return np.clip(a + math.log(fixed), box.lo, box.hi)


def _coordinate_descent(heights: np.ndarray, counts: np.ndarray,
                        vols: np.ndarray, n: int, box: ValueBox,
                        tol: float = 1e-10, max_sweeps: int = 10_000) -> None:
    """Projected exact coordinate descent on the penalized likelihood.

    For coordinate j with the others fixed, the unconstrained minimizer
    solves vol_j e^{c_j} / Z = n_j / n, i.e. c_j = ln(A n_j / (vol_j (n - n_j)))
    with A the mass of the other cells; projecting it onto the box is exact
    because the objective is convex in c_j. Started at the scale-equation
    solution this terminates in one or two sweeps; the sweep cap only guards
    against numerical degeneracy.
    """
    mass = vols * np.exp(heights)
    total = float(mass.sum())
    for _ in range(max_sweeps):
        biggest = 0.0
        for j in range(heights.shape[0]):
            other = total - mass[j]
            nj = counts[j]
            if nj == 0:
                target = box.lo
            elif nj == n:
                target = box.hi
            else:
                target = math.log(other * nj / (vols[j] * (n - nj)))
                target = min(max(target, box.lo), box.hi)
            change = abs(target - heights[j])
            if change > biggest:
                biggest = change
            heights[j] = target
            new_mass = vols[j] * math.exp(target)
            total = other + new_mass
            mass[j] = new_mass
        if biggest < tol:
            return
    raise NumericError("density height optimization failed to converge")


def density_objective(heights, counts, vols, n: int) -> float:
    """The penalized likelihood objective (used by tests and sanity checks)."""
    h = np.asarray(heights, dtype=float)
    return float(-np.dot(h, counts) / n + math.log(np.dot(vols, np.exp(h))))


def recenter(heights, cells: Sequence[Cell]) -> np.ndarray:
    """Subtract the integral so the piecewise-constant function has mean zero."""
    h = np.asarray(heights, dtype=float)
    vols = np.array([volume(c) for c in cells])
    if len(cells) != h.shape[0]:
        raise InputError("heights and cells have mismatched lengths")
    return h - float(np.dot(vols, h))


def _ensemble_log_heights(trees: Sequence[DensityTree], points: np.ndarray) -> np.ndarray:
    total = np.zeros(points.shape[0])
    for tree in trees:
        ids = locate_batch(tree.partition, tree.lam, points)
        total += tree.heights[ids]
    return total / len(trees)


def overlay_breakpoints(trees: Sequence[DensityTree]) -> np.ndarray:
    """Sorted union of all trees' 1-d cell boundaries, including 0 and 1."""
    edges = {0.0, 1.0}
    for tree in trees:
        for cell in leaves_at(tree.partition, tree.lam):
            edges.add(cell.lo[0])
            edges.add(cell.hi[0])
    return np.array(sorted(edges))


def log_normalizer_for(trees: Sequence[DensityTree],
                       integration: ExactOverlay | GridMC) -> float:
    """ln of the integral of exp(average tree log-density) over the cube."""
    dimension = trees[0].partition.dimension
    if isinstance(integration, ExactOverlay):
        if dimension != 1:
            raise InputError("exact overlay normalization requires d = 1")
        edges = overlay_breakpoints(trees)
        mids = 0.5 * (edges[:-1] + edges[1:])
        widths = np.diff(edges)
        h_bar = _ensemble_log_heights(trees, mids.reshape(-1, 1))
        return float(math.log(np.dot(widths, np.exp(h_bar))))
    sampler = qmc.Sobol(d=dimension, scramble=True,
                        seed=np.random.default_rng(integration.seed))
    exponent = int(round(math.log2(integration.point_count)))
    if 2**exponent == integration.point_count:
        grid = sampler.random_base2(exponent)
    else:
        grid = sampler.random(integration.point_count)
    grid = np.clip(grid, 0.0, 1.0)
    h_bar = _ensemble_log_heights(trees, grid)
    return float(math.log(np.mean(np.exp(h_bar))))


def log_normalizer(model: DensityModel) -> float:
    return log_normalizer_for(model.trees, model.integration)


def fit_density_forest(xs, lam: float, tree_count: int, seed: int,
                       box: ValueBox, grid_points: int = DEFAULT_GRID_POINTS,
                       grid_seed: int | None = None,
                       leaf_cap: int = DEFAULT_LEAF_CAP) -> DensityModel:
    """Fit, recenter, and normalize a density forest on points ``xs``."""
    points = as_points(xs)
    if tree_count < 1:
        raise InputError("tree_count must be >= 1")
    dimension = points.shape[1]
    children = np.random.SeedSequence(int(seed)).spawn(tree_count)
    trees = []
    for b, child in enumerate(children):
        rng = np.random.default_rng(child)
        partition = sample_partition(dimension, lam, rng, leaf_cap=leaf_cap,
                                     stream_id=f"{seed}/{b}")
        heights = fit_density_tree(partition, lam, points, box)
        heights = recenter(heights, leaves_at(partition, lam))
        trees.append(DensityTree(partition=partition, lam=lam, heights=heights))
    if dimension == 1:
        integration: ExactOverlay | GridMC = ExactOverlay()
    else:
        integration = GridMC(point_count=grid_points,
                             seed=int(seed) if grid_seed is None else int(grid_seed))
    ln_z = log_normalizer_for(trees, integration)
    return DensityModel(trees=tuple(trees), log_normalizer=ln_z,
                        integration=integration)


def density_eval_batch(model: DensityModel, xs) -> np.ndarray:
    points = as_points(xs, dimension=model.dimension)
    h_bar = _ensemble_log_heights(model.trees, points)
    return np.exp(h_bar - model.log_normalizer)


def density_eval(model: DensityModel, x) -> float:
    point = as_point(x, dimension=model.dimension)
    return float(density_eval_batch(model, point.reshape(1, -1))[0])


def density_model_to_obj(model: DensityModel) -> dict:
    if isinstance(model.integration, ExactOverlay):
        integration_obj: dict = {"method": "overlay"}
    else:
        integration_obj = {"method": "grid", "point_count": model.integration.point_count,
                           "seed": model.integration.seed}
    return {
        "format": SERIAL_FORMAT,
        "dimension": model.dimension,
        "tree_count": len(model.trees),
        "log_normalizer": model.log_normalizer,
        "integration": integration_obj,
        "trees": [
            {
                "lambda": tree.lam,
                "heights": [float(h) for h in tree.heights],
                "partition": partition_to_obj(tree.partition),
            }
            for tree in model.trees
        ],
    }


def density_model_from_obj(obj: dict) -> DensityModel:
    try:
        if obj["format"] != SERIAL_FORMAT:
            raise InputError(f"unknown density model format {obj.get('format')!r}")
        integ_obj = obj["integration"]
        if integ_obj["method"] == "overlay":
            integration: ExactOverlay | GridMC = ExactOverlay()
        elif integ_obj["method"] == "grid":
            integration = GridMC(point_count=int(integ_obj["point_count"]),
                                 seed=int(integ_obj["seed"]))
        else:
            raise InputError(f"unknown integration method {integ_obj['method']!r}")
        trees = tuple(
            DensityTree(
                partition=partition_from_obj(t["partition"]),
                lam=float(t["lambda"]),
                heights=np.asarray(t["heights"], dtype=float),
            )
            for t in obj["trees"]
        )
        return DensityModel(trees=trees,
                            log_normalizer=float(obj["log_normalizer"]),
                            integration=integration)
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"malformed density model object: {exc}") from exc


def save_density_model(model: DensityModel, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(json.dumps(density_model_to_obj(model), indent=1) + "\n")


def load_density_model(path) -> DensityModel:
    with open(path, "r", encoding="ascii") as fh:
        try:
            obj = json.loads(fh.read())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed density model: {exc}") from exc
    return density_model_from_obj(obj)
