"""Random recursive axis-aligned partitions of the unit cube.

A partition tree is grown by attaching an exponential clock to every cell:
a cell born at time ``tau`` waits an Exponential(rate = linear size) time,
and if the clock rings before the horizon the cell splits along dimension
``J`` (chosen with probability proportional to side length) at a threshold
drawn uniformly inside the side. Children inherit the ring time as their
birth time. The tree records the full genealogy up to the horizon, so the
coarser partition at any earlier time ``lam <= horizon`` can be read off by
ignoring splits born after ``lam``.

Threshold ownership is half-open and matches :func:`mondrian_forest.core.contains`:
the left child is ``[lo, S)`` and the right child ``[S, hi]`` along the
split dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .core import (
    DEFAULT_LEAF_CAP,
    Cell,
    InputError,
    NumericError,
    ResourceError,
    as_point,
    as_points,
    contains,
    linear_size,
    unit_cell,
)

SERIAL_FORMAT = "mondrian-partition-v1"


@dataclass(frozen=True)
class LeafNode:
    cell: Cell


@dataclass(frozen=True)
class SplitNode:
    cell: Cell
    birth_time: float  # time at which this cell split
    split_dim: int
    threshold: float
    left: "Node"
    right: "Node"


Node = Union[LeafNode, SplitNode]


@dataclass(frozen=True)
class PartitionTree:
    """A sampled partition genealogy up to ``horizon``.

    ``stream_id`` names the random stream that produced the tree, so a fit
    can be reproduced from its serialized header alone.
    """

    dimension: int
    horizon: float
    root: Node
    stream_id: str


def sample_split(cell: Cell, rng: np.random.Generator) -> tuple[int, float]:
    """Draw a split (dimension, threshold) for ``cell``.

    The dimension is chosen with probability proportional to its side
    length and the threshold uniformly inside the chosen side (endpoints
    excluded, redrawing on the measure-zero collisions).
    """
    sides = cell.side_lengths()
    total = float(sides.sum())
    if total <= 0.0:
        raise NumericError("cannot split a degenerate cell")
    u = rng.uniform(0.0, total)
    acc = 0.0
    dim = cell.dimension - 1
    for j, s in enumerate(sides):
        acc += float(s)
        if u < acc:
            dim = j
            break
    lo, hi = cell.lo[dim], cell.hi[dim]
    threshold = rng.uniform(lo, hi)
    while threshold <= lo or threshold >= hi:
        threshold = rng.uniform(lo, hi)
    return dim, float(threshold)


def _grow(cell: Cell, tau: float, horizon: float, rng: np.random.Generator,
          leaf_cap: int, counter: list[int]) -> Node:
    size = linear_size(cell)
    if size > 0.0:
        wait = rng.exponential(1.0 / size)
    else:
        wait = np.inf
    birth = tau + wait
    if birth > horizon:
        counter[0] += 1
        if counter[0] > leaf_cap:
            raise ResourceError(f"partition exceeded leaf cap {leaf_cap}")
        return LeafNode(cell=cell)
    dim, threshold = sample_split(cell, rng)
    left_cell = Cell(lo=cell.lo, hi=cell.hi[:dim] + (threshold,) + cell.hi[dim + 1:])
    right_cell = Cell(lo=cell.lo[:dim] + (threshold,) + cell.lo[dim + 1:], hi=cell.hi)
    left = _grow(left_cell, birth, horizon, rng, leaf_cap, counter)
    right = _grow(right_cell, birth, horizon, rng, leaf_cap, counter)
    return SplitNode(cell=cell, birth_time=birth, split_dim=dim,
                     threshold=threshold, left=left, right=right)


def sample_partition(dimension: int, horizon: float,
                     rng: np.random.Generator | int,
                     leaf_cap: int = DEFAULT_LEAF_CAP,
                     stream_id: str | None = None) -> PartitionTree:
    """Sample a partition tree of [0,1]^``dimension`` up to time ``horizon``.

    ``rng`` may be a seeded generator or a plain integer seed. The number of
    leaves is capped at ``leaf_cap``; exceeding it aborts with
    :class:`ResourceError` rather than consuming unbounded memory.
    """
    if dimension < 1:
        raise InputError("dimension must be >= 1")
    if not np.isfinite(horizon) or horizon < 0.0:
        raise InputError("horizon must be finite and >= 0")
    if isinstance(rng, (int, np.integer)):
        if stream_id is None:
            stream_id = str(int(rng))
        rng = np.random.default_rng(int(rng))
    if stream_id is None:
        stream_id = "anonymous"
    counter = [0]
    root = _grow(unit_cell(dimension), 0.0, horizon, rng, leaf_cap, counter)
    return PartitionTree(dimension=dimension, horizon=horizon, root=root,
                         stream_id=stream_id)


def _check_lambda(tree: PartitionTree, lam: float) -> float:
    if not np.isfinite(lam) or lam < 0.0:
        raise InputError("lambda must be finite and >= 0")
    if lam > tree.horizon:
        raise InputError(f"lambda {lam} exceeds tree horizon {tree.horizon}")
    return float(lam)


def _active(node: Node, lam: float) -> bool:
    return isinstance(node, SplitNode) and node.birth_time <= lam


def _iter_leaves(node: Node, lam: float) -> Iterator[Cell]:
    if _active(node, lam):
        yield from _iter_leaves(node.left, lam)
        yield from _iter_leaves(node.right, lam)
    else:
        yield node.cell


def leaves_at(tree: PartitionTree, lam: float) -> list[Cell]:
    """Leaf cells of the partition at time ``lam``, in stable pre-order."""
    lam = _check_lambda(tree, lam)
    return list(_iter_leaves(tree.root, lam))


def leaf_count_at(tree: PartitionTree, lam: float) -> int:
    return len(leaves_at(tree, lam))


def split_times(tree: PartitionTree) -> list[float]:
    """Sorted birth times of all splits in the genealogy (empty if none)."""
    times: list[float] = []
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if isinstance(node, SplitNode):
            times.append(node.birth_time)
            stack.append(node.left)
            stack.append(node.right)
    times.sort()
    return times


def locate(tree: PartitionTree, lam: float, x) -> int:
    """Pre-order index of the leaf of the time-``lam`` partition containing ``x``."""
    lam = _check_lambda(tree, lam)
    point = as_point(x, dimension=tree.dimension)
    node = tree.root
    index = 0
    while _active(node, lam):
        if point[node.split_dim] < node.threshold:
            node = node.left
        else:
            index += sum(1 for _ in _iter_leaves(node.left, lam))
            node = node.right
    return index


def locate_batch(tree: PartitionTree, lam: float, xs) -> np.ndarray:
    """Vectorized :func:`locate`; returns an int array of leaf indices."""
    lam = _check_lambda(tree, lam)
    points = as_points(xs, dimension=tree.dimension)
    out = np.empty(points.shape[0], dtype=np.int64)
    next_id = [0]

    def assign(node: Node, idx: np.ndarray) -> None:
        if _active(node, lam):
            go_left = points[idx, node.split_dim] < node.threshold
            assign(node.left, idx[go_left])
            assign(node.right, idx[~go_left])
        else:
            out[idx] = next_id[0]
            next_id[0] += 1

    assign(tree.root, np.arange(points.shape[0]))
    return out


def cell_of(tree: PartitionTree, lam: float, x) -> Cell:
    """The leaf cell of the time-``lam`` partition containing ``x``."""
    lam = _check_lambda(tree, lam)
    point = as_point(x, dimension=tree.dimension)
    node = tree.root
    while _active(node, lam):
        node = node.left if point[node.split_dim] < node.threshold else node.right
    if not contains(node.cell, point):
        raise NumericError("descent reached a cell that does not contain the point")
    return node.cell


def _node_to_obj(node: Node) -> dict:
    if isinstance(node, SplitNode):
        return {
            "dim": node.split_dim,
            "threshold": node.threshold,
            "birth_time": node.birth_time,
            "left": _node_to_obj(node.left),
            "right": _node_to_obj(node.right),
        }
    return {"lo": list(node.cell.lo), "hi": list(node.cell.hi)}


def _node_from_obj(obj: dict, cell: Cell) -> Node:
    if "dim" in obj:
        dim = int(obj["dim"])
        threshold = float(obj["threshold"])
        if not 0 <= dim < cell.dimension:
            raise InputError(f"split dimension {dim} out of range")
        left_cell = Cell(lo=cell.lo, hi=cell.hi[:dim] + (threshold,) + cell.hi[dim + 1:])
        right_cell = Cell(lo=cell.lo[:dim] + (threshold,) + cell.lo[dim + 1:], hi=cell.hi)
        return SplitNode(
            cell=cell,
            birth_time=float(obj["birth_time"]),
            split_dim=dim,
            threshold=threshold,
            left=_node_from_obj(obj["left"], left_cell),
            right=_node_from_obj(obj["right"], right_cell),
        )
    leaf_cell = Cell(lo=tuple(float(v) for v in obj["lo"]),
                     hi=tuple(float(v) for v in obj["hi"]))
    if leaf_cell != cell:
        raise InputError("serialized leaf cell does not match its genealogy")
    return LeafNode(cell=leaf_cell)


def partition_to_obj(tree: PartitionTree) -> dict:
    return {
        "format": SERIAL_FORMAT,
        "dimension": tree.dimension,
        "horizon": tree.horizon,
        "stream_id": tree.stream_id,
        "root": _node_to_obj(tree.root),
    }


def partition_from_obj(obj: dict) -> PartitionTree:
    try:
        if obj["format"] != SERIAL_FORMAT:
            raise InputError(f"unknown partition format {obj.get('format')!r}")
        dimension = int(obj["dimension"])
        root = _node_from_obj(obj["root"], unit_cell(dimension))
        return PartitionTree(dimension=dimension, horizon=float(obj["horizon"]),
                             root=root, stream_id=str(obj["stream_id"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed partition object: {exc}") from exc


def partition_to_text(tree: PartitionTree) -> str:
    """Serialize to text; floats round-trip exactly."""
    return json.dumps(partition_to_obj(tree), indent=1)


def partition_from_text(text: str) -> PartitionTree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed partition text: {exc}") from exc
    return partition_from_obj(obj)
