"""Reverse-mode gradients against central finite differences."""

import numpy as np
import pytest

from nets.autograd import Tensor, parameter, concat, masked_softmax, gather_rows
from nets.layers import init_layer_norm, layer_norm, as_parameters, collect_grads

STEP = 1e-5


def numeric_grad(fn, value):
    value = np.array(value, dtype=np.float64)
    grad = np.zeros_like(value)
    for index in np.ndindex(value.shape):
        saved = value[index]
        value[index] = saved + STEP
        upper = fn(value)
        value[index] = saved - STEP
        lower = fn(value)
        value[index] = saved
        grad[index] = (upper - lower) / (2 * STEP)
    return grad


def check_grad(build, value, rtol=1e-5, atol=1e-7):
    """build(Tensor) -> scalar Tensor; compares backward() with finite differences."""
    leaf = parameter(value)
    build(leaf).backward()
    expected = numeric_grad(lambda v: float(build(Tensor(v)).value), value)
    np.testing.assert_allclose(leaf.grad, expected, rtol=rtol, atol=atol)


def test_elementwise_chain():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 4))
    check_grad(lambda t: ((t * t + 1.0).log() * t.tanh() - t.exp() / 3.0).sum(), x)


def test_shared_node_accumulates():
    leaf = parameter(np.array([1.5, -2.0]))
    y = leaf * 3.0
    (y * y + y).sum().backward()
    # d/dx (9x^2 + 3x) = 18x + 3
    np.testing.assert_allclose(leaf.grad, 18.0 * np.array([1.5, -2.0]) + 3.0)


def test_batched_matmul_against_shared_weight():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(2, 3, 4))
    w = rng.normal(size=(4, 5))
    check_grad(lambda t: ((Tensor(x) @ t).tanh()).sum(), w)
    check_grad(lambda t: ((t @ Tensor(w)) ** 2).mean(), x)


def test_broadcast_add_sums_back():
    rng = np.random.default_rng(2)
    bias = rng.normal(size=(5,))
    x = rng.normal(size=(2, 3, 5))
    check_grad(lambda t: ((Tensor(x) + t).relu() * Tensor(x)).sum(), bias)


def test_reshape_and_transpose():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 3, 4))
    weights = rng.normal(size=(4, 2, 3))
    check_grad(lambda t: (t.transpose(2, 0, 1) * Tensor(weights)).reshape(8, 3).sum(axis=0).tanh().sum(), x)


def test_concat_splits_gradient():
    a = parameter(np.ones((2, 2)))
    b = parameter(np.ones((2, 3)))
    (concat([a, b], axis=1) * np.arange(5.0)).sum().backward()
    np.testing.assert_allclose(a.grad, np.tile([0.0, 1.0], (2, 1)))
    np.testing.assert_allclose(b.grad, np.tile([2.0, 3.0, 4.0], (2, 1)))


class TestMaskedSoftmax:
    def test_masked_entries_are_exact_zero(self):
        scores = Tensor(np.array([[3.0, 1e3, -2.0, 0.5]]))
        mask = np.array([[True, False, True, True]])
        weights = masked_softmax(scores, mask).value
        assert weights[0, 1] == 0.0
        assert weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_gradient(self):
        rng = np.random.default_rng(4)
        scores = rng.normal(size=(2, 5))
        mask = np.array([[True, True, False, True, False], [False, True, True, True, True]])
        target = rng.normal(size=(2, 5))
        check_grad(lambda t: (masked_softmax(t, mask) * Tensor(target)).sum(), scores)


def test_gather_rows_accumulates_repeats():
    table = parameter(np.arange(6.0).reshape(3, 2))
    gather_rows(table, np.array([[0, 2, 0]])).sum().backward()
    np.testing.assert_allclose(table.grad, [[2.0, 2.0], [0.0, 0.0], [1.0, 1.0]])


def test_layer_norm_gradient():
    rng = np.random.default_rng(5)
    params = {}
    init_layer_norm(params, 'ln', 6)
    params['ln.gain'] = rng.normal(size=6)
    x = rng.normal(size=(2, 3, 6))
    target = rng.normal(size=(2, 3, 6))

    leaves = as_parameters(params)
    (layer_norm(leaves, 'ln', Tensor(x)) * Tensor(target)).sum().backward()
    grads = collect_grads(leaves)

    def loss(gain):
        p = {'ln.gain': Tensor(gain), 'ln.offset': Tensor(params['ln.offset'])}
        return float((layer_norm(p, 'ln', Tensor(x)) * Tensor(target)).sum().value)

    np.testing.assert_allclose(grads['ln.gain'], numeric_grad(loss, params['ln.gain']), rtol=1e-5, atol=1e-7)
    check_grad(lambda t: (layer_norm(as_parameters(params), 'ln', t) * Tensor(target)).sum(), x)


def test_unused_leaf_collects_zero_grad():
    leaves = as_parameters({'used': np.ones(2), 'unused': np.ones(3)})
    (leaves['used'] * 2.0).sum().backward()
    grads = collect_grads(leaves)
    np.testing.assert_allclose(grads['unused'], np.zeros(3))
    np.testing.assert_allclose(grads['used'], [2.0, 2.0])
