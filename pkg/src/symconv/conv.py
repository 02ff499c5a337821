"""Unconstrained 2D convolution, activations, and the triangular BCE loss.

The convolution is a stride-1, zero-padded "same" cross-correlation: kernel
offsets index the input directly rather than in flipped order, so

    out[s, t, f] = bias[f] + sum_{i,j,k} W[i,j,k,f] * in[s+i-p, t+j-p, k]

with p = (C-1)//2 and out-of-range input taken as zero.  Kernel sizes must be
odd: only then is the padding symmetric under a spatial transpose, which the
symmetric layers built on top of this module rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, DomainError, ShapeError
from .tensor import as_tensor, zeros


@dataclass(frozen=True)
class Conv2dKernel:
    """Full C x C x c_in x F kernel with a per-output-channel bias."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = as_tensor(self.weights)
        if w.ndim != 4 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ShapeError(f"kernel weights must be CxCxc_inxF, got {w.shape}")
        b = as_tensor(self.bias)
        if b.shape != (w.shape[3],):
            raise ShapeError(f"bias shape {b.shape} does not match F={w.shape[3]}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def size(self):
        return self.weights.shape[0]

    @property
    def in_channels(self):
        return self.weights.shape[2]

    @property
    def out_channels(self):
        return self.weights.shape[3]


@dataclass(frozen=True)
class ConvGrads:
    """Gradients of a scalar loss through one convolution layer."""

    d_weights: np.ndarray
    d_bias: np.ndarray
    d_input: np.ndarray


def _check_conv_args(x, kernel):
    x = as_tensor(x)
    if x.ndim != 3 or x.shape[0] != x.shape[1]:
        raise ShapeError(f"input must be L x L x c_in, got {x.shape}")
    if kernel.size % 2 == 0:
        raise ConfigError(f"kernel size must be odd, got {kernel.size}")
    if x.shape[2] != kernel.in_channels:
        raise ShapeError(
            f"input has {x.shape[2]} channels, kernel expects {kernel.in_channels}"
        )
    return x


def _padded_windows(image, size):
    """All C x C patches of the zero-padded image: [s, t, c, i, j]."""
    pad = (size - 1) // 2
    padded = np.pad(image, ((pad, pad), (pad, pad), (0, 0)))
    return sliding_window_view(padded, (size, size), axis=(0, 1))


def conv2d_forward(x, kernel):
    """Same-size cross-correlation of an L x L x c_in input, plus bias."""
    x = _check_conv_args(x, kernel)
    windows = _padded_windows(x, kernel.size)
    out = np.einsum("stkij,ijkf->stf", windows, kernel.weights, optimize=True)
    return np.ascontiguousarray(out + kernel.bias)


def conv2d_backward(x, kernel, upstream):
    """Exact gradients for conv2d_forward given upstream = dL/d(out)."""
    x = _check_conv_args(x, kernel)
    upstream = as_tensor(upstream)
    want = (x.shape[0], x.shape[1], kernel.out_channels)
    if upstream.shape != want:
        raise ShapeError(f"upstream shape {upstream.shape}, expected {want}")

    d_bias = upstream.sum(axis=(0, 1))
    windows = _padded_windows(x, kernel.size)
    d_weights = np.einsum("stkij,stf->ijkf", windows, upstream, optimize=True)

    # dL/d(in) is the same-padded correlation of the upstream signal with the
    # spatially flipped kernel, summed over output channels.
    flipped = kernel.weights[::-1, ::-1, :, :]
    up_windows = _padded_windows(upstream, kernel.size)
    d_input = np.einsum("uvfij,ijkf->uvk", up_windows, flipped, optimize=True)

    return ConvGrads(
        d_weights=np.ascontiguousarray(d_weights),
        d_bias=np.ascontiguousarray(d_bias),
        d_input=np.ascontiguousarray(d_input),
    )


def relu_forward(x):
    return np.maximum(as_tensor(x), 0.0)


def relu_backward(x, upstream):
    """Chain upstream through max(0, x) evaluated at the forward input x."""
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    if x.shape != upstream.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {upstream.shape}")
    return upstream * (x > 0.0)


def sigmoid_forward(x):
    x = as_tensor(x)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    expx = np.exp(x[~pos])
    out[~pos] = expx / (1.0 + expx)
    return out


def sigmoid_backward(x, upstream):
    """Chain upstream through the sigmoid evaluated at the forward input x."""
    x = as_tensor(x)
    upstream = as_tensor(upstream)
    if x.shape != upstream.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {upstream.shape}")
    s = sigmoid_forward(x)
    return upstream * s * (1.0 - s)


def upper_triangle_mask(length, min_sep=1):
    """Boolean L x L mask of entries with (column - row) >= max(1, min_sep)."""
    if min_sep < 0:
        raise DomainError(f"min_sep must be >= 0, got {min_sep}")
    sep = max(1, int(min_sep))
    rows, cols = np.indices((length, length))
    return cols - rows >= sep


def weighted_bce_upper(pred, label, pos_weight=5.0, min_sep=1):
    """Positive-weighted binary cross-entropy over the upper triangle.

    Averages -[pos_weight * y * log(p) + (1 - y) * log(1 - p)] over the
    entries with column - row >= max(1, min_sep) and returns (loss, d_pred)
    where d_pred is the exact gradient, zero outside the included triangle.
    Predictions must lie strictly inside (0, 1): apply a sigmoid first.
    """
    pred = as_tensor(pred)
    label = as_tensor(label)
    if pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
        raise ShapeError(f"pred must be L x L, got {pred.shape}")
    if label.shape != pred.shape:
        raise ShapeError(f"label shape {label.shape} != pred shape {pred.shape}")
    if np.any(pred <= 0.0) or np.any(pred >= 1.0):
        raise DomainError("pred entries must lie strictly inside (0, 1)")
    if not np.all((label == 0.0) | (label == 1.0)):
        raise DomainError("label entries must be 0 or 1")
    if pos_weight <= 0.0:
        raise DomainError(f"pos_weight must be > 0, got {pos_weight}")

    mask = upper_triangle_mask(pred.shape[0], min_sep)
    count = int(mask.sum())
    d_pred = zeros(pred.shape)
    if count == 0:
        return 0.0, d_pred

    p = pred[mask]
    y = label[mask]
    terms = pos_weight * y * np.log(p) + (1.0 - y) * np.log(1.0 - p)
    loss = -float(terms.sum()) / count
    d_pred[mask] = -(pos_weight * y / p - (1.0 - y) / (1.0 - p)) / count
    return loss, d_pred
