"""Ensembles of independently grown trees, averaged pointwise."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import (
    Dataset,
    FitConfig,
    FixedLambda,
    AutoLambda,
    InputError,
    ValueBox,
    as_point,
    as_points,
)
from .losses import LossSpec, is_surrogate
from .partition import partition_from_obj, partition_to_obj, sample_partition
from .tree import FittedTree, fit_tree, predict_tree_batch

DEFAULT_TREE_COUNT = 100

SERIAL_FORMAT = "mondrian-forest-v1"


@dataclass(frozen=True)
class Forest:
    trees: tuple[FittedTree, ...]
    spec: LossSpec
    config: FitConfig

    @property
    def dimension(self) -> int:
        return self.trees[0].partition.dimension


def tree_streams(seed: int, tree_count: int) -> list[np.random.Generator]:
    """Independent per-tree generators derived from one master seed.

    Substreams are spawned from a single seed sequence, so tree ``b`` sees
    the same randomness no matter how many trees run or in what order.
    """
    children = np.random.SeedSequence(int(seed)).spawn(tree_count)
    return [np.random.default_rng(child) for child in children]


def fit_forest(data: Dataset, spec: LossSpec, config: FitConfig) -> Forest:
    """Fit ``config.tree_count`` trees at a fixed horizon and ensemble them."""
    if not isinstance(config.lambda_mode, FixedLambda):
        raise InputError("fit_forest requires FixedLambda mode; use fit_forest_auto")
    lam = config.lambda_mode.value
    streams = tree_streams(config.seed, config.tree_count)
    trees = []
    for b, rng in enumerate(streams):
        partition = sample_partition(
            data.dimension, lam, rng, leaf_cap=config.leaf_cap,
            stream_id=f"{config.seed}/{b}")
        trees.append(fit_tree(partition, lam, data, spec, config.value_box))
    return Forest(trees=tuple(trees), spec=spec, config=config)


def predict_batch(forest: Forest, xs) -> np.ndarray:
    points = as_points(xs, dimension=forest.dimension)
    total = np.zeros(points.shape[0])
    for tree in forest.trees:
        total += predict_tree_batch(tree, points)
    return total / len(forest.trees)


def predict(forest: Forest, x) -> float:
    point = as_point(x, dimension=forest.dimension)
    return float(predict_batch(forest, point.reshape(1, -1))[0])


def classify_batch(forest: Forest, xs) -> np.ndarray:
    """Labels in {-1,+1}; the decision boundary (prediction 0) maps to -1."""
    if not is_surrogate(forest.spec):
        raise InputError("classification requires a surrogate loss family")
    preds = predict_batch(forest, xs)
    return np.where(preds > 0.0, 1, -1).astype(np.int64)


def classify(forest: Forest, x) -> int:
    point = as_point(x, dimension=forest.dimension)
    return int(classify_batch(forest, point.reshape(1, -1))[0])


def _spec_to_obj(spec: LossSpec) -> dict:
    obj: dict = {"family": spec.family}
    if spec.tau is not None:
        obj["tau"] = spec.tau
    if spec.delta is not None:
        obj["delta"] = spec.delta
    if spec.value_domain is not None:
        obj["value_domain"] = [spec.value_domain.lo, spec.value_domain.hi]
    return obj


def _spec_from_obj(obj: dict) -> LossSpec:
    domain = obj.get("value_domain")
    return LossSpec(
        family=str(obj["family"]),
        tau=obj.get("tau"),
        delta=obj.get("delta"),
        value_domain=ValueBox(float(domain[0]), float(domain[1])) if domain else None,
    )


def forest_to_obj(forest: Forest) -> dict:
    cfg = forest.config
    if isinstance(cfg.lambda_mode, FixedLambda):
        mode_obj = {"mode": "fixed", "value": cfg.lambda_mode.value}
    else:
        mode_obj = {"mode": "auto", "alpha": cfg.lambda_mode.alpha,
                    "lambda_max": cfg.lambda_mode.lambda_max}
    return {
        "format": SERIAL_FORMAT,
        "dimension": forest.dimension,
        "tree_count": cfg.tree_count,
        "loss": _spec_to_obj(forest.spec),
        "box": [cfg.value_box.lo, cfg.value_box.hi],
        "seed": cfg.seed,
        "leaf_cap": cfg.leaf_cap,
        "lambda_mode": mode_obj,
        "trees": [
            {
                "lambda": tree.lam,
                "leaf_values": [float(v) for v in tree.leaf_values],
                "partition": partition_to_obj(tree.partition),
            }
            for tree in forest.trees
        ],
    }


def forest_from_obj(obj: dict) -> Forest:
    try:
        if obj["format"] != SERIAL_FORMAT:
            raise InputError(f"unknown forest format {obj.get('format')!r}")
        spec = _spec_from_obj(obj["loss"])
        box = ValueBox(float(obj["box"][0]), float(obj["box"][1]))
        mode_obj = obj["lambda_mode"]
        if mode_obj["mode"] == "fixed":
            mode = FixedLambda(float(mode_obj["value"]))
        elif mode_obj["mode"] == "auto":
            mode = AutoLambda(float(mode_obj["alpha"]), float(mode_obj["lambda_max"]))
        else:
            raise InputError(f"unknown lambda mode {mode_obj['mode']!r}")
        config = FitConfig(
            tree_count=int(obj["tree_count"]), lambda_mode=mode, value_box=box,
            seed=int(obj["seed"]), leaf_cap=int(obj["leaf_cap"]))
        trees = []
        for tree_obj in obj["trees"]:
            partition = partition_from_obj(tree_obj["partition"])
            trees.append(FittedTree(
                partition=partition,
                lam=float(tree_obj["lambda"]),
                leaf_values=np.asarray(tree_obj["leaf_values"], dtype=float),
                loss=spec,
                box=box,
            ))
        if len(trees) != config.tree_count:
            raise InputError("tree count does not match header")
        return Forest(trees=tuple(trees), spec=spec, config=config)
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"malformed forest object: {exc}") from exc


def forest_to_text(forest: Forest) -> str:
    return json.dumps(forest_to_obj(forest), indent=1)


def forest_from_text(text: str) -> Forest:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed forest text: {exc}") from exc
    return forest_from_obj(obj)


def save_forest(forest: Forest, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(forest_to_text(forest) + "\n")


def load_forest(path) -> Forest:
    with open(path, "r", encoding="ascii") as fh:
        return forest_from_text(fh.read())
