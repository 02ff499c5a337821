import itertools

import numpy as np
import numpy.testing as npt
import pytest

from symconv import (
    Conv2dKernel,
    FdSpec,
    OracleError,
    Rng,
    ShapeError,
    brute_force_expand_count,
    conv2d_forward,
    fd_gradient,
    naive_conv2d,
    sigmoid_forward,
    weighted_bce_upper,
    worst_relative_error,
)


def test_naive_identity_kernel():
    x = np.asarray(Rng(1).uniform_signed((3, 3, 1)))
    out = naive_conv2d(x, np.ones((1, 1, 1, 1)))
    npt.assert_array_equal(out, x)


def test_naive_corner_value_by_hand():
    # 2x2 input, 3x3 kernel: the (0,0) output sees input entries (0,0),
    # (0,1), (1,0), (1,1) against kernel taps (1,1), (1,2), (2,1), (2,2).
    x = np.arange(1.0, 5.0).reshape(2, 2, 1)
    weights = np.arange(1.0, 10.0).reshape(3, 3, 1, 1)
    out = naive_conv2d(x, weights)
    by_hand = (
        weights[1, 1, 0, 0] * x[0, 0, 0]
        + weights[1, 2, 0, 0] * x[0, 1, 0]
        + weights[2, 1, 0, 0] * x[1, 0, 0]
        + weights[2, 2, 0, 0] * x[1, 1, 0]
    )
    assert out[0, 0, 0] == by_hand


def test_naive_agrees_with_fast_path():
    rng = Rng(2)
    for size, channels in itertools.product([1, 3, 5], [1, 3]):
        x = np.asarray(rng.uniform_signed((6, 6, channels)))
        kernel = Conv2dKernel(
            weights=np.asarray(rng.uniform_signed((size, size, channels, 2))),
            bias=np.asarray(rng.uniform_signed(2)),
        )
        slow = naive_conv2d(x, kernel.weights, kernel.bias)
        fast = conv2d_forward(x, kernel)
        assert np.max(np.abs(slow - fast)) <= 1e-12


def test_naive_rejects_shape_mismatch():
    with pytest.raises(ShapeError):
        naive_conv2d(np.zeros((3, 3, 2)), np.zeros((3, 3, 1, 1)))


def test_fd_gradient_linear_function_is_exact():
    rng = Rng(3)
    direction = np.asarray(rng.uniform_signed(12))
    params = np.asarray(rng.uniform_signed(12))
    # central differences are exact for linear functions at any step; a
    # larger step keeps f(p+h)-f(p-h) clear of float cancellation
    grad = fd_gradient(lambda p: float(direction @ p), params, FdSpec(step=1e-3))
    assert np.max(np.abs(grad - direction)) <= 1e-10
    grad_default = fd_gradient(lambda p: float(direction @ p), params)
    assert np.max(np.abs(grad_default - direction)) <= 1e-8


def test_fd_gradient_quadratic_closed_form():
    params = np.asarray(Rng(4).uniform_signed((3, 4)))
    grad = fd_gradient(lambda p: 0.5 * float(np.sum(p * p)), params.copy())
    assert np.max(np.abs(grad - params)) <= 1e-9


def test_fd_gradient_through_conv_and_bce_pipeline():
    rng = Rng(5)
    x = np.asarray(rng.uniform_signed((4, 4, 2)))
    kernel = Conv2dKernel(
        weights=np.asarray(rng.uniform_signed((3, 3, 2, 1))), bias=np.zeros(1)
    )
    upper = np.triu(np.asarray(rng.uniform_signed((4, 4))) > 0, k=1).astype(np.float64)
    label = upper + upper.T

    def loss(w):
        logits = conv2d_forward(x, Conv2dKernel(weights=w, bias=kernel.bias))[:, :, 0]
        return weighted_bce_upper(sigmoid_forward(logits), label, 5.0, 1)[0]

    from symconv import conv2d_backward, sigmoid_backward

    logits = conv2d_forward(x, kernel)[:, :, 0]
    _, d_prob = weighted_bce_upper(sigmoid_forward(logits), label, 5.0, 1)
    d_logits = sigmoid_backward(logits, d_prob)
    analytic = conv2d_backward(x, kernel, d_logits[:, :, None]).d_weights
    numeric = fd_gradient(loss, kernel.weights.copy())
    assert worst_relative_error(analytic, numeric) <= 1e-6


def test_fd_gradient_raises_on_non_finite_loss():
    with pytest.raises(OracleError):
        fd_gradient(lambda p: float("nan"), np.ones(2))


def test_fd_spec_rejects_nonpositive_step():
    with pytest.raises(ShapeError):
        FdSpec(step=0.0)


def test_expand_counts_reference_values():
    assert brute_force_expand_count("gen", 3, 5, 8) == (240, 720)
    assert brute_force_expand_count("pres", 3, 4, 4) == (96, 144)


def test_expand_counts_degenerate_spatial_case():
    stored, full = brute_force_expand_count("gen", 1, 3, 2)
    assert stored * 2 == full
    stored, full = brute_force_expand_count("pres", 1, 3, 2)
    assert stored == full


def test_expand_counts_match_closed_forms_over_grid():
    for size, channels, out in itertools.product((1, 3, 5), range(1, 7), (1, 4, 8)):
        stored, full = brute_force_expand_count("gen", size, channels, out)
        assert stored == size * (size + 1) * channels * out // 2
        assert full == size * size * 2 * channels * out
        stored, full = brute_force_expand_count("pres", size, channels, out)
        assert stored == size * (size + 1) * channels * out // 2
        assert full == size * size * channels * out


def test_expand_counts_rejects_unknown_kind():
    with pytest.raises(ShapeError):
        brute_force_expand_count("other", 3, 2, 2)
