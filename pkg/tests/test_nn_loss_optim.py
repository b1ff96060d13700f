"""Loss gradient checks and Adam update-rule tests."""

from __future__ import annotations

import math

import numpy as np
import pytest

from seedlingcv.nn import Adam, adam_step, softmax_weighted_ce
from seedlingcv.nn.layers import Param
from seedlingcv.tensor import SeededRng

from conftest import central_difference, relative_error


def test_uniform_logits_loss_is_log_k():
    for k in (2, 5, 12):
        logits = np.zeros((4, k))
        labels = np.arange(4) % k
        loss, grad = softmax_weighted_ce(logits, labels, np.ones(k))
        assert math.isclose(loss, math.log(k), rel_tol=1e-12)
        assert grad.shape == logits.shape


def test_loss_gradient_matches_finite_differences():
    rng = SeededRng(900)
    for case in range(20):
        n = 1 + rng.randint(6)
        k = 2 + rng.randint(6)
        logits = (rng.uniform(n * k) * 4.0 - 2.0).reshape(n, k)
        labels = np.array([rng.randint(k) for _ in range(n)])
        weights = 0.25 + rng.uniform(k) * 2.0
        _, grad = softmax_weighted_ce(logits, labels, weights)

        def loss_of(lg):
            return softmax_weighted_ce(lg, labels, weights)[0]

        num = central_difference(loss_of, logits.copy())
        assert relative_error(grad, num) < 1e-4, f"case {case}"


def test_loss_shift_invariance():
    rng = SeededRng(42)
    logits = (rng.uniform(12) * 6.0 - 3.0).reshape(3, 4)
    labels = np.array([0, 3, 2])
    w = np.ones(4)
    base, _ = softmax_weighted_ce(logits, labels, w)
    shifted, _ = softmax_weighted_ce(logits + 1000.0, labels, w)
    assert math.isclose(base, shifted, rel_tol=1e-9)


def test_loss_weighting_behaviour():
    logits = np.array([[2.0, 0.0], [0.0, 2.0]])
    labels = np.array([0, 1])
    balanced, _ = softmax_weighted_ce(logits, labels, np.array([1.0, 1.0]))
    # both samples have identical per-sample loss, so reweighting one
    # class cannot change the weighted mean
    skewed, _ = softmax_weighted_ce(logits, labels, np.array([3.0, 1.0]))
    assert math.isclose(balanced, skewed, rel_tol=1e-12)
    # with different per-sample losses the weights move the mean toward
    # the upweighted class; sample 0 has the larger loss here
    logits2 = np.array([[0.5, 0.0], [0.0, 4.0]])
    l_even, _ = softmax_weighted_ce(logits2, labels, np.array([1.0, 1.0]))
    l_up0, _ = softmax_weighted_ce(logits2, labels, np.array([5.0, 1.0]))
    per_sample0 = math.log(1.0 + math.exp(-0.5))
    per_sample1 = math.log(1.0 + math.exp(-4.0))
    assert math.isclose(l_even, (per_sample0 + per_sample1) / 2.0, rel_tol=1e-12)
    assert math.isclose(l_up0, (5.0 * per_sample0 + per_sample1) / 6.0, rel_tol=1e-12)
    assert l_up0 > l_even


def test_loss_validation():
    with pytest.raises(ValueError):
        softmax_weighted_ce(np.zeros(3), np.zeros(3, dtype=int), np.ones(3))
    with pytest.raises(ValueError):
        softmax_weighted_ce(np.zeros((2, 3)), np.array([0, 3]), np.ones(3))
    with pytest.raises(ValueError):
        softmax_weighted_ce(np.zeros((2, 3)), np.array([0, 1]), np.array([1.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        softmax_weighted_ce(np.zeros((2, 3)), np.array([0, 1]), np.ones(4))


def test_adam_first_step_magnitude():
    # with any constant gradient g, the bias-corrected first step is
    # lr * g / (|g| + eps), i.e. roughly lr in magnitude
    param = np.array([1.0, -2.0, 3.0])
    grad = np.array([0.3, -0.7, 0.001])
    m = np.zeros(3)
    v = np.zeros(3)
    before = param.copy()
    adam_step(param, grad, m, v, t=1, lr=0.01)
    step = before - param
    assert np.allclose(step, 0.01 * np.sign(grad), atol=1e-4)


def test_adam_step_reference_two_iterations():
    # hand-rolled reference of the documented update rule
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    p = np.array([0.5])
    g1, g2 = np.array([0.2]), np.array([-0.4])
    m = np.zeros(1)
    v = np.zeros(1)

    ref_p, ref_m, ref_v = 0.5, 0.0, 0.0
    for t, g in ((1, 0.2), (2, -0.4)):
        ref_m = b1 * ref_m + (1 - b1) * g
        ref_v = b2 * ref_v + (1 - b2) * g * g
        mhat = ref_m / (1 - b1 ** t)
        vhat = ref_v / (1 - b2 ** t)
        ref_p -= lr * mhat / (math.sqrt(vhat) + eps)

    adam_step(p, g1, m, v, t=1, lr=lr)
    adam_step(p, g2, m, v, t=2, lr=lr)
    assert math.isclose(p[0], ref_p, rel_tol=1e-12)


def test_adam_validation():
    a = np.zeros(2)
    with pytest.raises(ValueError):
        adam_step(a, a, a, a, t=0, lr=0.1)
    with pytest.raises(ValueError):
        adam_step(a, a, a, a, t=1, lr=0.0)
    with pytest.raises(ValueError):
        adam_step(a, np.zeros(3), a, a, t=1, lr=0.1)


def test_adam_class_shares_step_counter():
    p1 = Param("a", np.array([1.0]))
    p2 = Param("b", np.array([2.0, 3.0]))
    opt = Adam([p1, p2], lr=0.05)
    p1.grad = np.array([1.0])
    p2.grad = np.array([-1.0, 1.0])
    opt.step()
    assert opt.t == 1
    opt.step()
    assert opt.t == 2
    # both tensors moved
    assert p1.value[0] != 1.0
    assert p2.value[0] != 2.0 and p2.value[1] != 3.0
    with pytest.raises(ValueError):
        Adam([p1], lr=-1.0)


def test_adam_descends_a_quadratic():
    p = Param("w", np.array([4.0, -3.0]))
    opt = Adam([p], lr=0.1)
    for _ in range(500):
        p.grad = 2.0 * p.value  # d/dw ||w||^2
        opt.step()
    assert np.abs(p.value).max() < 1e-2
