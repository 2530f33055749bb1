# Copyright (c) 2025 Bytedance Ltd. and/or its affiliates
# SPDX-License-Identifier: MIT

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.autodiff import (
    Tape,
    Tensor,
    active_tape,
    add,
    add_bias,
    average,
    backward,
    column_slice,
    concat_columns,
    cross_entropy,
    finite_diff_grad,
    gather_rows,
    is_grad_enabled,
    layer_norm_op,
    matmul,
    mul,
    no_grad,
    relative_error,
    relu,
    scale,
    softmax_rows,
    sum_all,
    transpose,
    weighted_fusion,
)
from src.errors import ShapeError, TapeError

rng = np.random.default_rng(1234)


def _param(*shape, gen=rng):
    return Tensor(gen.standard_normal(shape), requires_grad=True)


def _check(loss_fn, *params, tol=1e-6):
    """Backward grads of every param against central differences."""
    for p in params:
        p.zero_grad()
    with Tape():
        backward(loss_fn())
    analytic = [p.grad.copy() for p in params]
    for p, grad in zip(params, analytic):
        numeric = finite_diff_grad(lambda _: loss_fn(), p)
        assert relative_error(grad, numeric.data) < tol


def test_tensor_is_float64_and_contiguous():
    """Test tensors always hold contiguous float64 data."""
    t = Tensor([[1, 2], [3, 4]])
    assert t.data.dtype == np.float64
    assert t.data.flags["C_CONTIGUOUS"]
    assert t.shape == (2, 2)
    assert t.is_leaf


def test_item_requires_single_element():
    assert Tensor(3.5).item() == 3.5
    with pytest.raises(ValueError):
        Tensor([1.0, 2.0]).item()


def test_zero_extent_tensor_is_allowed():
    empty = Tensor(np.zeros((0, 4)))
    out = matmul(empty, Tensor(np.ones((4, 3))))
    assert out.shape == (0, 3)


def test_matmul_hand_products():
    """Test matmul with the identity and a 1×2 by 2×1 product."""
    m = Tensor([[1.0, 2.0], [3.0, 4.0]])
    assert_array_equal(matmul(Tensor(np.eye(2)), m).data, m.data)
    product = matmul(Tensor([[1.0, 2.0]]), Tensor([[3.0], [4.0]]))
    assert_array_equal(product.data, [[11.0]])


def test_matmul_matches_triple_loop():
    a, b = rng.standard_normal((3, 4)), rng.standard_normal((4, 2))
    expected = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    assert_allclose(matmul(Tensor(a), Tensor(b)).data, expected, rtol=0, atol=1e-12)


def test_matmul_is_associative():
    """Test (AB)C equals A(BC) on random conforming triples."""
    gen = np.random.default_rng(5)
    for _ in range(20):
        m, k, p, q = gen.integers(1, 6, size=4)
        a = Tensor(gen.standard_normal((m, k)))
        b = Tensor(gen.standard_normal((k, p)))
        c = Tensor(gen.standard_normal((p, q)))
        left = matmul(matmul(a, b), c).data
        right = matmul(a, matmul(b, c)).data
        assert relative_error(left, right) < 1e-9


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError) as exc_info:
        matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))
    assert "(2, 3)" in str(exc_info.value)


def test_add_shape_mismatch():
    with pytest.raises(ShapeError):
        add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))


def test_backward_requires_scalar_loss():
    """Test backward refuses a non-scalar loss."""
    x = _param(2, 2)
    with Tape():
        y = mul(x, x)
        with pytest.raises(TapeError):
            backward(y)


def test_backward_twice_raises():
    """Test a consumed tape cannot be swept a second time."""
    x = _param(3)
    with Tape():
        loss = sum_all(mul(x, x))
        backward(loss)
        with pytest.raises(TapeError):
            backward(loss)


def test_backward_on_unrecorded_tensor_raises():
    with pytest.raises(TapeError):
        backward(Tensor(1.0))


def test_backward_hand_gradients():
    """Test grad of sum(x) is all ones and grad of sum(x⊙x) is 2x."""
    x = Tensor([1.0, 2.0, 3.0], requires_grad=True)
    with Tape():
        backward(sum_all(x))
    assert_array_equal(x.grad, [1.0, 1.0, 1.0])
    y = Tensor([1.0, 2.0], requires_grad=True)
    with Tape():
        backward(sum_all(mul(y, y)))
    assert_array_equal(y.grad, [2.0, 4.0])


def test_operations_outside_a_tape_are_not_recorded():
    """Test grad-enabled ops keep no graph without an open tape."""
    x = _param(2, 2)
    for _ in range(3):
        loss = sum_all(matmul(x, x))
        assert loss.is_leaf and not loss.requires_grad
    assert active_tape() is None
    with pytest.raises(TapeError):
        backward(loss)


def test_tape_block_allows_several_rounds():
    """Test a fresh tape replaces the consumed one inside the same block."""
    x = Tensor([1.0, 2.0], requires_grad=True)
    with Tape() as outer:
        backward(sum_all(mul(x, x)))
        assert outer.consumed
        second = sum_all(scale(x, 3.0))
        assert active_tape() is not outer
        backward(second)
    assert_array_equal(x.grad, [5.0, 7.0])
    assert active_tape() is None


def test_leaf_grads_accumulate_across_tapes():
    """Test grads add up until zero_grad is called."""
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    for _ in range(2):
        with Tape():
            backward(sum_all(scale(x, 3.0)))
    assert_array_equal(x.grad, [6.0, 6.0])
    x.zero_grad()
    assert x.grad is None


def test_shared_input_gets_summed_gradient():
    x = Tensor(np.array([2.0]), requires_grad=True)
    with Tape():
        backward(sum_all(add(mul(x, x), x)))
    assert_allclose(x.grad, [5.0])


def test_no_grad_records_nothing():
    """Test no_grad suppresses recording even inside a tape."""
    x = _param(2, 2)
    with Tape() as tape:
        with no_grad():
            assert not is_grad_enabled()
            y = matmul(x, x)
        assert is_grad_enabled()
    assert len(tape) == 0
    assert not y.requires_grad


def test_constant_inputs_are_not_recorded():
    with Tape() as tape:
        out = matmul(Tensor(np.ones((2, 2))), Tensor(np.ones((2, 2))))
    assert len(tape) == 0
    assert out.is_leaf


def test_backward_is_independent_of_recording_order():
    """Test grads do not depend on the order operations were recorded."""

    def run(swap):
        a = Tensor(np.array([0.3, -0.2]), requires_grad=True)
        b = Tensor(np.array([1.5, 0.7]), requires_grad=True)
        with Tape():
            if swap:
                tb = mul(b, b)
                ta = mul(a, b)
            else:
                ta = mul(a, b)
                tb = mul(b, b)
            backward(sum_all(add(ta, tb)))
        return a.grad, b.grad

    for g1, g2 in zip(run(False), run(True)):
        assert_array_equal(g1, g2)


def test_finite_diff_rejects_non_positive_step():
    with pytest.raises(ValueError):
        finite_diff_grad(lambda x: sum_all(x), Tensor([1.0]), h=0.0)


def test_finite_diff_of_square():
    """Test central differences of sum(x²) and restoration of x."""
    x = Tensor(np.array([1.0, -2.0, 0.5]))
    grad = finite_diff_grad(lambda t: sum_all(mul(t, t)), x)
    assert_allclose(grad.data, 2 * x.data, atol=1e-8)
    assert_array_equal(x.data, [1.0, -2.0, 0.5])
    ones = finite_diff_grad(lambda t: sum_all(t), Tensor(rng.standard_normal(4)))
    assert_allclose(ones.data, np.ones(4), atol=1e-9)


def test_relative_error_floor():
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert relative_error(np.array([1e-9]), np.zeros(1)) == pytest.approx(1e-5)
    assert relative_error(np.array([2.0]), np.array([1.0])) == pytest.approx(0.5)


def test_matmul_grad():
    a, b = _param(3, 4), _param(4, 2)
    _check(lambda: sum_all(mul(matmul(a, b), matmul(a, b))), a, b)


def test_add_bias_grad():
    x, b = _param(3, 4), _param(4)
    w = Tensor(rng.standard_normal((3, 4)))
    _check(lambda: sum_all(mul(add_bias(x, b), w)), x, b)


def test_relu_grad():
    x = Tensor(np.array([[0.5, -1.2], [2.0, -0.3]]), requires_grad=True)
    w = Tensor(rng.standard_normal((2, 2)))
    _check(lambda: sum_all(mul(relu(x), w)), x)


def test_relu_values_and_dead_inputs():
    """Test relu clips negatives and passes no gradient through them."""
    assert_array_equal(relu(Tensor([-1.0, 0.0, 2.0])).data, [0.0, 0.0, 2.0])
    x = Tensor(-np.abs(rng.standard_normal(5)) - 0.1, requires_grad=True)
    with Tape():
        out = relu(x)
        backward(sum_all(out))
    assert_array_equal(out.data, np.zeros(5))
    assert_array_equal(x.grad, np.zeros(5))
    y = Tensor([-1.0, 2.0], requires_grad=True)
    with Tape():
        backward(sum_all(relu(y)))
    assert_array_equal(y.grad, [0.0, 1.0])


def test_softmax_rows_sum_to_one_and_grad():
    x = _param(3, 5)
    w = Tensor(rng.standard_normal((3, 5)))
    y = softmax_rows(x)
    assert_allclose(y.data.sum(axis=1), np.ones(3), rtol=0, atol=1e-12)
    _check(lambda: sum_all(mul(softmax_rows(x), w)), x)


def test_softmax_is_stable_and_shift_invariant():
    """Test large equal scores do not overflow and row shifts change nothing."""
    with np.errstate(over="raise", invalid="raise"):
        big = softmax_rows(Tensor([[1000.0, 1000.0]])).data
    assert_array_equal(big, [[0.5, 0.5]])
    assert_array_equal(softmax_rows(Tensor([[0.0, 0.0]])).data, [[0.5, 0.5]])
    x = rng.standard_normal((4, 6))
    shifted = x + rng.standard_normal((4, 1)) * 50
    assert_allclose(
        softmax_rows(Tensor(shifted)).data,
        softmax_rows(Tensor(x)).data,
        rtol=0,
        atol=1e-12,
    )


def test_softmax_matches_extended_precision():
    z = np.array([1.0, 2.0, 3.0], dtype=np.longdouble)
    expected = np.exp(z) / np.exp(z).sum()
    out = softmax_rows(Tensor([[1.0, 2.0, 3.0]])).data[0]
    assert_allclose(out, expected.astype(np.float64), rtol=1e-14, atol=0)


def test_masked_softmax_gives_zero_weight():
    x = _param(2, 3)
    mask = np.array([[True, False, True], [True, True, False]])
    y = softmax_rows(x, mask=mask)
    assert y.data[0, 1] == 0.0
    assert y.data[1, 2] == 0.0
    w = Tensor(rng.standard_normal((2, 3)))
    _check(lambda: sum_all(mul(softmax_rows(x, mask=mask), w)), x)


def test_transpose_slice_concat_grads():
    x = _param(3, 4)
    w = Tensor(rng.standard_normal((3, 4)))

    def loss():
        left, right = column_slice(x, 0, 2), column_slice(x, 2, 4)
        joined = concat_columns([right, left])
        return sum_all(mul(transpose(transpose(joined)), w))

    _check(loss, x)


def test_gather_rows_scatter_adds():
    """Test repeated ids accumulate into the same table row."""
    table = _param(5, 3)
    ids = np.array([1, 3, 1])
    with Tape():
        backward(sum_all(gather_rows(table, ids)))
    assert_array_equal(table.grad[1], [2.0, 2.0, 2.0])
    assert_array_equal(table.grad[0], [0.0, 0.0, 0.0])


def test_layer_norm_statistics_and_grad():
    x, gain, bias = _param(4, 6), _param(6), _param(6)
    ones, zeros = Tensor(np.ones(6)), Tensor(np.zeros(6))
    y = layer_norm_op(x, ones, zeros, 1e-5)
    assert_allclose(y.data.mean(axis=1), np.zeros(4), atol=1e-12)
    assert_allclose(y.data.var(axis=1), np.ones(4), atol=1e-4)
    w = Tensor(rng.standard_normal((4, 6)))
    _check(lambda: sum_all(mul(layer_norm_op(x, gain, bias, 1e-5), w)), x, gain, bias)


def test_average_and_weighted_fusion_grads():
    x = _param(2, 3)
    feats = [_param(2, 3) for _ in range(3)]
    alpha, beta = _param(3), Tensor(0.7, requires_grad=True)
    w = Tensor(rng.standard_normal((2, 3)))

    def loss():
        avg = average(feats[:2])
        fused = weighted_fusion(x, alpha, beta, [feats[0], feats[2], avg])
        return sum_all(mul(fused, w))

    _check(loss, x, alpha, beta, *feats)


def test_weighted_fusion_alpha_length_mismatch():
    x = Tensor(np.ones((2, 2)))
    with pytest.raises(ShapeError):
        weighted_fusion(x, Tensor(np.ones(3)), Tensor(1.0), [x, x])


def test_cross_entropy_value_and_grad():
    """Test mean token cross-entropy against a direct log-softmax."""
    logits = _param(4, 5)
    targets = np.array([0, 4, 2, 2])
    value = cross_entropy(logits, targets).item()
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    log_p = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    assert value == pytest.approx(-log_p[np.arange(4), targets].mean())
    _check(lambda: cross_entropy(logits, targets), logits)


def _weights(gen, shape):
    return Tensor(gen.standard_normal(shape))


def _case_matmul(gen):
    a, b = _param(2, 3, gen=gen), _param(3, 2, gen=gen)
    w = _weights(gen, (2, 2))
    return lambda: sum_all(mul(matmul(a, b), w)), [a, b]


def _case_add_mul_scale(gen):
    a, b = _param(2, 3, gen=gen), _param(2, 3, gen=gen)
    w = _weights(gen, (2, 3))
    return lambda: sum_all(mul(scale(add(a, mul(a, b)), 1.7), w)), [a, b]


def _case_add_bias(gen):
    x, b = _param(3, 2, gen=gen), _param(2, gen=gen)
    w = _weights(gen, (3, 2))
    return lambda: sum_all(mul(add_bias(x, b), w)), [x, b]


def _case_relu(gen):
    x = _param(3, 3, gen=gen)
    w = _weights(gen, (3, 3))
    return lambda: sum_all(mul(relu(x), w)), [x]


def _case_softmax(gen):
    x = _param(2, 4, gen=gen)
    w = _weights(gen, (2, 4))
    return lambda: sum_all(mul(softmax_rows(x), w)), [x]


def _case_transpose_slice_concat(gen):
    x = _param(2, 4, gen=gen)
    w = _weights(gen, (4, 2))

    def loss():
        joined = concat_columns([column_slice(x, 1, 4), column_slice(x, 0, 1)])
        return sum_all(mul(transpose(joined), w))

    return loss, [x]


def _case_gather_rows(gen):
    table = _param(4, 2, gen=gen)
    ids = gen.integers(0, 4, size=5)
    w = _weights(gen, (5, 2))
    return lambda: sum_all(mul(gather_rows(table, ids), w)), [table]


def _case_layer_norm(gen):
    x, gain, bias = _param(2, 4, gen=gen), _param(4, gen=gen), _param(4, gen=gen)
    w = _weights(gen, (2, 4))
    return lambda: sum_all(mul(layer_norm_op(x, gain, bias, 1e-5), w)), [x, gain, bias]


def _case_average_fusion(gen):
    x = _param(2, 3, gen=gen)
    feats = [_param(2, 3, gen=gen) for _ in range(2)]
    alpha, beta = _param(3, gen=gen), _param(1, gen=gen)
    w = _weights(gen, (2, 3))

    def loss():
        mixed = [feats[0], feats[1], average(feats)]
        return sum_all(mul(weighted_fusion(x, alpha, beta, mixed), w))

    return loss, [x, alpha, beta, *feats]


def _case_cross_entropy(gen):
    logits = _param(3, 4, gen=gen)
    targets = gen.integers(0, 4, size=3)
    return lambda: cross_entropy(logits, targets), [logits]


OP_CASES = {
    "matmul": _case_matmul,
    "add_mul_scale": _case_add_mul_scale,
    "add_bias": _case_add_bias,
    "relu": _case_relu,
    "softmax_rows": _case_softmax,
    "transpose_slice_concat": _case_transpose_slice_concat,
    "gather_rows": _case_gather_rows,
    "layer_norm": _case_layer_norm,
    "average_fusion": _case_average_fusion,
    "cross_entropy": _case_cross_entropy,
}


@pytest.mark.parametrize("op", sorted(OP_CASES))
def test_op_backward_matches_finite_differences_over_seeds(op):
    """Test each differentiable op against central differences for 100 seeds."""
    for seed in range(100):
        gen = np.random.default_rng(seed)
        loss_fn, params = OP_CASES[op](gen)
        with Tape():
            backward(loss_fn())
        for p in params:
            numeric = finite_diff_grad(lambda _: loss_fn(), p, h=1e-5)
            err = relative_error(p.grad, numeric.data)
            assert err < 1e-4, f"{op} seed={seed}: rel_err={err:.3e}"
