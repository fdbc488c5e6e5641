"""Tests for synthetic data generation and ground-truth evaluators."""

import math

import numpy as np
import pytest
from scipy.stats import norm

from mondrian_forest import Dataset, InputError, TargetFunction, generate
from mondrian_forest.synth import (
    bayes_error,
    classification_error,
    conditional_probability,
    true_excess_risk,
)


def test_target_kinds_and_values():
    sine = TargetFunction("sine", amplitude=0.5)
    xs = np.array([[0.25], [0.5], [0.75]])
    assert sine(xs) == pytest.approx([0.5, 0.0, -0.5], abs=1e-12)
    add = TargetFunction("additive_sine", amplitude=1.0)
    pts = np.array([[0.25, 0.25], [0.25, 0.75]])
    assert add(pts) == pytest.approx([1.0, 0.0], abs=1e-12)
    bump = TargetFunction("sqrt_bump", amplitude=2.0, offset=1.0)
    assert bump(np.array([[0.5]]))[0] == pytest.approx(1.0, abs=1e-12)
    assert bump(np.array([[1.0]]))[0] == pytest.approx(1.0 + 2.0 * math.sqrt(0.5),
                                                       abs=1e-12)
    with pytest.raises(InputError):
        TargetFunction("mystery")


def test_constant_target_consistency():
    const = TargetFunction("constant", amplitude=0.3, offset=0.1)
    xs = np.random.default_rng(46).random((50, 2))
    assert np.all(const(xs) == pytest.approx(0.4, abs=1e-15))
    assert const.range() == (pytest.approx(0.4), pytest.approx(0.4))
    assert const.holder_radius >= 0.4


def test_range_bounds_hold_empirically():
    rng = np.random.default_rng(47)
    for kind in ("sine", "additive_sine", "sqrt_bump", "constant"):
        target = TargetFunction(kind, amplitude=0.7, offset=-0.2)
        lo, hi = target.range()
        vals = target(rng.random((20_000, 2)))
        assert vals.min() >= lo - 1e-12
        assert vals.max() <= hi + 1e-12
        assert vals.max() >= lo and vals.min() <= hi
        assert np.max(np.abs(vals)) <= target.holder_radius + 1e-12


def test_holder_condition_spot_check():
    rng = np.random.default_rng(48)
    for kind in ("sine", "additive_sine", "sqrt_bump"):
        target = TargetFunction(kind, amplitude=0.5)
        p = target.smoothness
        c = target.holder_radius
        xs = rng.random((10_000, 2))
        ys = rng.random((10_000, 2))
        gap = np.abs(target(xs) - target(ys))
        dist = np.linalg.norm(xs - ys, axis=1)
        assert np.all(gap <= 1.05 * c * dist**p)


def test_noiseless_gaussian_reproduces_target():
    target = TargetFunction("sine", amplitude=0.5)
    data = generate("gaussian", target, 500, 1, seed=49, sigma=0.0)
    assert np.allclose(data.responses, target(data.points), atol=1e-12)


def test_generator_determinism():
    target = TargetFunction("sine", amplitude=0.4)
    a = generate("gaussian", target, 100, 2, seed=50)
    b = generate("gaussian", target, 100, 2, seed=50)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.responses, b.responses)
    c = generate("gaussian", target, 100, 2, seed=51)
    assert not np.array_equal(a.responses, c.responses)


def test_bernoulli_constant_mean():
    target = TargetFunction("constant", amplitude=0.3)
    data = generate("bernoulli", target, 20_000, 1, seed=52)
    assert set(np.unique(data.responses)) == {0.0, 1.0}
    se = math.sqrt(0.8 * 0.2 / data.n)
    assert abs(data.responses.mean() - 0.8) <= 3 * se


def test_poisson_constant_mean():
    target = TargetFunction("constant", amplitude=0.0)
    data = generate("poisson", target, 20_000, 1, seed=53)
    assert np.all(data.responses >= 0)
    assert np.all(data.responses == np.round(data.responses))
    se = math.sqrt(1.0 / data.n)
    assert abs(data.responses.mean() - 1.0) <= 3 * se


def test_classify_labels_and_geometric_support():
    target = TargetFunction("sine", amplitude=0.4)
    data = generate("classify", target, 2000, 1, seed=54)
    assert set(np.unique(data.responses)) == {-1.0, 1.0}
    geo_target = TargetFunction("constant", amplitude=-1.0)
    geo = generate("geometric", geo_target, 2000, 1, seed=55)
    assert np.all(geo.responses >= 1)
    assert np.all(geo.responses == np.round(geo.responses))
    mean = 1.0 / (1.0 - math.exp(-1.0))
    assert geo.responses.mean() == pytest.approx(mean, rel=0.05)


def test_density_task_rejection_sampler():
    target = TargetFunction("sine", amplitude=1.0)
    data = generate("density", target, 5000, 1, seed=56)
    assert data.responses is None
    assert data.points.shape == (5000, 1)
    left = float(np.mean(data.points[:, 0] < 0.5))
    assert left > 0.62


def test_inadmissible_targets_rejected():
    with pytest.raises(InputError):
        generate("bernoulli", TargetFunction("constant", amplitude=0.7), 10, 1, 1)
    with pytest.raises(InputError):
        generate("classify", TargetFunction("sine", amplitude=0.5), 10, 1, 1)
    with pytest.raises(InputError):
        generate("geometric", TargetFunction("sine", amplitude=0.5), 10, 1, 1)
    with pytest.raises(InputError):
        generate("mystery", TargetFunction("sine"), 10, 1, 1)


def test_conditional_probability_and_bayes_error():
    target = TargetFunction("sine", amplitude=0.15 * math.pi)
    xs = ((np.arange(100_000) + 0.5) / 100_000).reshape(-1, 1)
    eta = conditional_probability(target, xs)
    assert np.all((eta > 0.0) & (eta < 1.0))
    assert bayes_error(target, xs) == pytest.approx(0.2, abs=1e-6)
    flat = TargetFunction("constant", amplitude=0.2)
    assert bayes_error(flat, xs) == pytest.approx(0.3, abs=1e-12)


def test_classification_error_of_explicit_rules():
    target = TargetFunction("sine", amplitude=0.15 * math.pi)
    xs = ((np.arange(50_000) + 0.5) / 50_000).reshape(-1, 1)
    bayes_rule = np.where(target(xs) > 0.0, 1, -1)
    assert classification_error(bayes_rule, target, xs) == pytest.approx(
        bayes_error(target, xs), abs=1e-12)
    anti_rule = -bayes_rule
    assert classification_error(anti_rule, target, xs) == pytest.approx(
        1.0 - bayes_error(target, xs), abs=1e-12)


def test_true_excess_risk_examples():
    target = TargetFunction("sine", amplitude=0.5)
    xs = np.random.default_rng(57).random((10_000, 1))
    m = target(xs)
    assert true_excess_risk("gaussian", m, xs, target) == 0.0
    assert true_excess_risk("gaussian", m + 1.0, xs, target) == pytest.approx(
        1.0, abs=1e-12)
    direct = float(np.mean((m + 0.3 - m) ** 2))
    assert true_excess_risk("gaussian", m + 0.3, xs, target) == pytest.approx(
        direct, abs=1e-12)


def test_true_excess_risk_quantile_uses_shifted_target():
    target = TargetFunction("sine", amplitude=0.5)
    xs = np.random.default_rng(58).random((5_000, 1))
    tau = 0.9
    truth = target(xs) + norm.ppf(tau)
    assert true_excess_risk("quantile", truth, xs, target, tau=tau,
                            sigma=1.0) == pytest.approx(0.0, abs=1e-15)
    off = true_excess_risk("quantile", truth + 0.5, xs, target, tau=tau,
                           sigma=1.0)
    assert off == pytest.approx(0.25, abs=1e-12)


def test_true_excess_risk_classification_is_error_gap():
    target = TargetFunction("sine", amplitude=0.15 * math.pi)
    xs = ((np.arange(20_000) + 0.5) / 20_000).reshape(-1, 1)
    bayes_rule = np.where(target(xs) > 0.0, 1, -1)
    assert true_excess_risk("classify", bayes_rule, xs, target) == pytest.approx(
        0.0, abs=1e-12)
    anti = true_excess_risk("classify", -bayes_rule, xs, target)
    assert anti == pytest.approx(1.0 - 2 * bayes_error(target, xs), abs=1e-12)
