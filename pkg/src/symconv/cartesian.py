"""Lift a 1D feature sequence to the 2D pair tensor fed to generating layers."""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .tensor import as_tensor


def as_sequence_features(x):
    """Validate an L x n per-position feature matrix."""
    x = as_tensor(x)
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise ShapeError(f"sequence features must be L x n with L,n >= 1, got {x.shape}")
    return x


def self_cartesian(x):
    """Pair tensor y with y[i, j, :] = concat(x[i], x[j]), shape L x L x 2n.

    The first n channels carry the row position's features, the last n the
    column position's.  The result is generally not symmetric: swapping i and
    j swaps the channel halves instead.
    """
    x = as_sequence_features(x)
    length, width = x.shape
    y = np.empty((length, length, 2 * width), dtype=np.float64)
    y[:, :, :width] = x[:, None, :]
    y[:, :, width:] = x[None, :, :]
    return y


def pair_swap_check(y):
    """Worst deviation from the channel-half swap structure of a pair tensor.

    For a tensor built by :func:`self_cartesian` this is exactly 0: each
    fiber y[i, j, :] must equal y[j, i, :] with its channel halves swapped.
    """
    y = as_tensor(y)
    if y.ndim != 3 or y.shape[0] != y.shape[1]:
        raise ShapeError(f"expected an L x L x 2n tensor, got {y.shape}")
    if y.shape[2] % 2 != 0:
        raise ShapeError(f"channel count must be even, got {y.shape[2]}")
    half = y.shape[2] // 2
    swapped = np.swapaxes(y, 0, 1)
    first = np.max(np.abs(y[:, :, :half] - swapped[:, :, half:]))
    second = np.max(np.abs(y[:, :, half:] - swapped[:, :, :half]))
    return float(max(first, second))
