"""Tests for ensemble fitting, prediction, classification, serialization."""

import numpy as np
import pytest

from mondrian_forest import (
    Dataset,
    FitConfig,
    FixedLambda,
    Forest,
    InputError,
    LossSpec,
    ValueBox,
    classify,
    classify_batch,
    fit_forest,
    fit_tree,
    load_forest,
    predict,
    predict_batch,
    predict_tree,
    predict_tree_batch,
    sample_partition,
    save_forest,
)


def gaussian_data(seed: int, n: int, d: int = 1) -> Dataset:
    rng = np.random.default_rng(seed)
    xs = rng.random((n, d))
    ys = np.sin(2 * np.pi * xs[:, 0]) + 0.2 * rng.normal(size=n)
    return Dataset(xs, ys)


def label_data(seed: int, n: int) -> Dataset:
    rng = np.random.default_rng(seed)
    xs = rng.random((n, 1))
    ys = np.where(rng.random(n) < 0.5 + 0.4 * np.sin(2 * np.pi * xs[:, 0]),
                  1.0, -1.0)
    return Dataset(xs, ys)


def config_for(seed: int, trees: int = 5, lam: float = 2.0) -> FitConfig:
    return FitConfig(tree_count=trees, lambda_mode=FixedLambda(lam),
                     value_box=ValueBox(-5, 5), seed=seed)


def test_single_tree_forest_equals_tree():
    data = gaussian_data(101, 200)
    forest = fit_forest(data, LossSpec("squared"), config_for(5, trees=1))
    xs = np.random.default_rng(3).random((300, 1))
    assert np.array_equal(predict_batch(forest, xs),
                          predict_tree_batch(forest.trees[0], xs))


def test_same_seed_identical_predictions():
    data = gaussian_data(102, 200)
    spec = LossSpec("squared")
    a = fit_forest(data, spec, config_for(77))
    b = fit_forest(data, spec, config_for(77))
    xs = np.random.default_rng(4).random((1000, 1))
    assert np.array_equal(predict_batch(a, xs), predict_batch(b, xs))
    c = fit_forest(data, spec, config_for(78))
    assert not np.array_equal(predict_batch(a, xs), predict_batch(c, xs))


def test_forest_averages_trees():
    data = Dataset(np.array([[0.5]]), np.array([1.0]))
    spec = LossSpec("squared")
    box = ValueBox(-5, 5)
    part = sample_partition(1, 0.0, 1)
    t1 = fit_tree(part, 0.0, Dataset(np.array([[0.5]]), np.array([1.0])),
                  spec, box)
    t2 = fit_tree(part, 0.0, Dataset(np.array([[0.5]]), np.array([3.0])),
                  spec, box)
    config = config_for(1, trees=2, lam=0.0)
    forest = Forest(trees=(t1, t2), spec=spec, config=config)
    assert predict(forest, [0.25]) == 2.0


def test_ensemble_linearity_exact():
    data = gaussian_data(103, 300)
    forest = fit_forest(data, LossSpec("squared"), config_for(11, trees=7))
    xs = np.random.default_rng(5).random((1000, 1))
    batch = predict_batch(forest, xs)
    per_tree = np.stack([predict_tree_batch(t, xs) for t in forest.trees])
    assert np.array_equal(batch, per_tree.sum(axis=0) / len(forest.trees))
    for i in range(0, 1000, 211):
        assert predict(forest, xs[i]) == batch[i]


def test_predictions_in_convex_hull_of_leaf_values():
    data = gaussian_data(104, 100)
    box = ValueBox(-0.25, 0.25)
    config = FitConfig(tree_count=9, lambda_mode=FixedLambda(3.0),
                       value_box=box, seed=6)
    forest = fit_forest(data, LossSpec("squared"), config)
    xs = np.random.default_rng(7).random((800, 1))
    preds = predict_batch(forest, xs)
    assert np.all(preds >= box.lo - 1e-15)
    assert np.all(preds <= box.hi + 1e-15)


def test_permutation_invariance_of_fit():
    data = gaussian_data(105, 150)
    perm = np.random.default_rng(8).permutation(data.n)
    shuffled = Dataset(data.points[perm], data.responses[perm])
    spec = LossSpec("squared")
    a = fit_forest(data, spec, config_for(9))
    b = fit_forest(shuffled, spec, config_for(9))
    xs = np.random.default_rng(10).random((500, 1))
    assert np.allclose(predict_batch(a, xs), predict_batch(b, xs), atol=1e-12)


def test_classification_sign_convention():
    data = label_data(106, 400)
    forest = fit_forest(data, LossSpec("phi5"), config_for(12))
    xs = np.random.default_rng(13).random((500, 1))
    preds = predict_batch(forest, xs)
    labels = classify_batch(forest, xs)
    assert set(np.unique(labels)) <= {-1, 1}
    assert np.array_equal(labels, np.where(preds > 0.0, 1, -1))
    assert classify(forest, xs[0]) == labels[0]


def test_boundary_tie_goes_negative():
    part = sample_partition(1, 0.0, 14)
    spec = LossSpec("phi5")
    box = ValueBox(-4, 4)
    tied = Dataset(np.array([[0.2], [0.8]]), np.array([1.0, -1.0]))
    tree = fit_tree(part, 0.0, tied, spec, box)
    config = config_for(15, trees=1, lam=0.0)
    forest = Forest(trees=(tree,), spec=spec, config=config)
    assert predict(forest, [0.5]) == 0.0
    assert classify(forest, [0.5]) == -1


def test_classify_requires_surrogate():
    data = gaussian_data(107, 50)
    forest = fit_forest(data, LossSpec("squared"), config_for(16))
    with pytest.raises(InputError):
        classify_batch(forest, np.array([[0.5]]))


def test_label_flip_flips_decisions():
    data = label_data(108, 300)
    flipped = Dataset(data.points, -data.responses)
    xs = np.random.default_rng(17).random((400, 1))
    for family in ("phi1", "phi5", "phi6"):
        spec = LossSpec(family)
        a = fit_forest(data, spec, config_for(18))
        b = fit_forest(flipped, spec, config_for(18))
        pa = predict_batch(a, xs)
        pb = predict_batch(b, xs)
        assert np.allclose(pa, -pb, atol=1e-12), family
        la = classify_batch(a, xs)
        lb = classify_batch(b, xs)
        ties = pa == 0.0
        assert np.array_equal(la[~ties], -lb[~ties]), family


def test_serialization_round_trip(tmp_path):
    data = gaussian_data(109, 250)
    forest = fit_forest(data, LossSpec("pinball", tau=0.7), config_for(19))
    path = tmp_path / "model.json"
    save_forest(forest, path)
    text = path.read_text()
    back = load_forest(path)
    save_forest(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_text() == text
    xs = np.random.default_rng(20).random((1000, 1))
    assert np.array_equal(predict_batch(forest, xs), predict_batch(back, xs))
    assert back.spec == forest.spec
    assert back.config.seed == forest.config.seed


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{\"format\": \"unexpected\"}")
    with pytest.raises(InputError):
        load_forest(path)
    path.write_text("not json")
    with pytest.raises(InputError):
        load_forest(path)
