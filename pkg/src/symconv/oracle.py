"""Deliberately naive reference implementations for tests and gradcheck.

Nothing here is fast and nothing here shares code with the main paths beyond
the raw array type: the convolution below is a literal quadruple loop and the
gradients come from central finite differences.  These are the anchors the
optimized implementations are verified against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleError, ShapeError
from .tensor import as_tensor


@dataclass(frozen=True)
class FdSpec:
    """Central-difference step and the tolerance used to compare gradients."""

    step: float = 1e-6
    rel_tol: float = 1e-5
    abs_floor: float = 1e-8

    def __post_init__(self):
        if self.step <= 0:
            raise ShapeError(f"step must be > 0, got {self.step}")


def naive_conv2d(x, weights, bias=None):
    """Direct-summation same-padded cross-correlation, written as plain loops."""
    x = as_tensor(x)
    weights = as_tensor(weights)
    if x.ndim != 3 or weights.ndim != 4:
        raise ShapeError(f"bad ranks: input {x.shape}, weights {weights.shape}")
    size = weights.shape[0]
    if weights.shape[1] != size:
        raise ShapeError(f"kernel not square: {weights.shape}")
    if x.shape[2] != weights.shape[2]:
        raise ShapeError(f"channel mismatch: {x.shape[2]} vs {weights.shape[2]}")
    length_r, length_c = x.shape[0], x.shape[1]
    out_channels = weights.shape[3]
    half = (size - 1) // 2
    out = np.zeros((length_r, length_c, out_channels), dtype=np.float64)
    for s in range(length_r):
        for t in range(length_c):
            for f in range(out_channels):
                acc = 0.0 if bias is None else float(bias[f])
                for i in range(size):
                    for j in range(size):
                        r, c = s + i - half, t + j - half
                        if 0 <= r < length_r and 0 <= c < length_c:
                            for k in range(x.shape[2]):
                                acc += weights[i, j, k, f] * x[r, c, k]
                out[s, t, f] = acc
    return out


def fd_gradient(loss_fn, params, spec=FdSpec()):
    """Central-difference gradient of a scalar function of an array."""
    params = as_tensor(params)
    grad = np.zeros_like(params)
    flat = params.reshape(-1)
    flat_grad = grad.reshape(-1)
    for idx in range(flat.size):
        saved = flat[idx]
        flat[idx] = saved + spec.step
        plus = float(loss_fn(params))
        flat[idx] = saved - spec.step
        minus = float(loss_fn(params))
        flat[idx] = saved
        if not (math.isfinite(plus) and math.isfinite(minus)):
            raise OracleError(f"non-finite loss near coordinate {idx}")
        flat_grad[idx] = (plus - minus) / (2.0 * spec.step)
    return grad


def relative_error(analytic, numeric, spec=FdSpec()):
    """Elementwise gradient mismatch, relative with an absolute floor.

    The comparison scale for each entry is max(|a|, |n|, abs_floor/rel_tol),
    so a pass at ``rel_tol`` is exactly |a - n| <= max(rel_tol * max(|a|,|n|),
    abs_floor).
    """
    analytic = as_tensor(analytic)
    numeric = as_tensor(numeric)
    if analytic.shape != numeric.shape:
        raise ShapeError(f"shape mismatch: {analytic.shape} vs {numeric.shape}")
    scale = np.maximum(
        np.maximum(np.abs(analytic), np.abs(numeric)), spec.abs_floor / spec.rel_tol
    )
    return np.abs(analytic - numeric) / scale


def worst_relative_error(analytic, numeric, spec=FdSpec()):
    return float(np.max(relative_error(analytic, numeric, spec)))


def brute_force_expand_count(kind, size, channels, out_channels):
    """Stored and expanded scalar counts of a packed kernel, by enumeration.

    Builds the kernel, expands it, and literally counts entries rather than
    evaluating the closed-form parameter-count formulas.
    """
    from .symkernel import SymGenKernel, SymPresKernel, expand_gen, expand_pres
    from .tensor import zeros

    tri = size * (size + 1) // 2
    if kind == "gen":
        kernel = SymGenKernel(
            packed=zeros((tri, channels, out_channels)),
            size=size,
            half_channels=channels,
            out_channels=out_channels,
            bias=zeros((out_channels,)),
        )
        full = expand_gen(kernel)
    elif kind == "pres":
        kernel = SymPresKernel(
            packed=zeros((tri, channels, out_channels)),
            size=size,
            in_channels=channels,
            out_channels=out_channels,
            bias=zeros((out_channels,)),
        )
        full = expand_pres(kernel)
    else:
        raise ShapeError(f"kind must be 'gen' or 'pres', got {kind!r}")

    stored = sum(1 for _ in kernel.packed.flat)
    expanded = sum(1 for _ in full.weights.flat)
    return stored, expanded
