"""Packed symmetric kernel parameterizations, expansion, and gradient folding.

Two kernel families are provided.  A *symmetry-generating* kernel expands
packed parameters into a full C x C x 2n x F kernel that is symmetric in its
two spatial indices and identical across its two channel halves; convolved
with a self-Cartesian pair tensor it produces a spatially symmetric output.
A *symmetry-preserving* kernel expands into a C x C x m x F kernel symmetric
in the spatial indices only; it maps symmetric inputs to symmetric outputs.

Packed storage is the single source of truth: the full kernel is re-derived
from it on every forward pass, so the tied entries can never drift apart and
the symmetry predicates hold bit-exactly after any number of update steps.

Triangle linearization (frozen): entry (i, j) with i >= j, both 0-based, is
stored at flat position i*(i+1)/2 + j, i.e. row-wise over the lower triangle
including the diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .conv import Conv2dKernel, conv2d_backward, conv2d_forward
from .errors import PreconditionError, ShapeError
from .tensor import as_tensor, asymmetry, load_tensor, save_tensor, zeros

SYMMETRY_INPUT_TOL = 1e-9


def tri_index(i, j):
    """Flat position of lower-triangle entry (i, j), 0-based, j <= i."""
    if j > i or j < 0:
        raise ShapeError(f"need 0 <= j <= i, got ({i}, {j})")
    return i * (i + 1) // 2 + j


def tri_count(size):
    """Number of stored spatial positions for a size x size kernel."""
    return size * (size + 1) // 2


def _tri_rows_cols(size):
    """Row/column indices of the lower triangle in storage order."""
    rows, cols = np.tril_indices(size)
    return rows, cols


def _tri_of(size):
    """(size, size) map from any (i, j) to its packed triangle position."""
    idx = np.empty((size, size), dtype=np.intp)
    for i in range(size):
        for j in range(size):
            hi, lo = max(i, j), min(i, j)
            idx[i, j] = tri_index(hi, lo)
    return idx


@dataclass(frozen=True)
class SymGenKernel:
    """Packed parameters of a symmetry-generating convolution kernel.

    ``packed`` has shape (C*(C+1)/2, n, F): one stored scalar per lower
    triangle spatial position and *single* channel half.  Each stored entry
    is replicated to four positions of the full kernel (two mirrored spatial
    slots times two channel halves; two slots on the spatial diagonal).
    """

    packed: np.ndarray
    size: int
    half_channels: int
    out_channels: int
    bias: np.ndarray

    def __post_init__(self):
        c, n, f = self.size, self.half_channels, self.out_channels
        if c < 1 or n < 1 or f < 1:
            raise ShapeError(f"invalid kernel dims C={c}, n={n}, F={f}")
        packed = as_tensor(self.packed, (tri_count(c), n, f))
        stored = packed.size
        if stored != c * (c + 1) * n * f // 2:
            raise ShapeError(f"stored count {stored} != C(C+1)nF/2")
        bias = as_tensor(self.bias)
        if bias.shape != (f,):
            raise ShapeError(f"bias shape {bias.shape} != ({f},)")
        object.__setattr__(self, "packed", packed)
        object.__setattr__(self, "bias", bias)

    @property
    def in_channels(self):
        return 2 * self.half_channels

    @property
    def stored_count(self):
        return int(self.packed.size)

    def with_params(self, packed, bias=None):
        return SymGenKernel(
            packed=packed,
            size=self.size,
            half_channels=self.half_channels,
            out_channels=self.out_channels,
            bias=self.bias if bias is None else bias,
        )


@dataclass(frozen=True)
class SymPresKernel:
    """Packed parameters of a symmetry-preserving convolution kernel.

    ``packed`` has shape (C*(C+1)/2, m, F); each off-diagonal stored entry
    fills the two mirrored spatial slots of the full kernel.
    """

    packed: np.ndarray
    size: int
    in_channels: int
    out_channels: int
    bias: np.ndarray

    def __post_init__(self):
        c, m, f = self.size, self.in_channels, self.out_channels
        if c < 1 or m < 1 or f < 1:
            raise ShapeError(f"invalid kernel dims C={c}, m={m}, F={f}")
        packed = as_tensor(self.packed, (tri_count(c), m, f))
        if packed.size != c * (c + 1) * m * f // 2:
            raise ShapeError(f"stored count {packed.size} != C(C+1)mF/2")
        bias = as_tensor(self.bias)
        if bias.shape != (f,):
            raise ShapeError(f"bias shape {bias.shape} != ({f},)")
        object.__setattr__(self, "packed", packed)
        object.__setattr__(self, "bias", bias)

    @property
    def stored_count(self):
        return int(self.packed.size)

    def with_params(self, packed, bias=None):
        return SymPresKernel(
            packed=packed,
            size=self.size,
            in_channels=self.in_channels,
            out_channels=self.out_channels,
            bias=self.bias if bias is None else bias,
        )


def expand_gen(kernel):
    """Full C x C x 2n x F kernel from packed generating parameters.

    W[i, j, k, f] = packed[tri(max(i,j), min(i,j)), k mod n, f]: spatially
    mirrored and duplicated across the two channel halves.
    """
    half = kernel.packed[_tri_of(kernel.size)]
    full = np.concatenate([half, half], axis=2)
    return Conv2dKernel(weights=full, bias=kernel.bias)


def fold_gen_grad(d_full):
    """Packed gradient from a full-kernel gradient of a generating kernel.

    Sums the full gradient over the (up to four) positions tied to each
    stored parameter: both channel halves, and both mirrored spatial slots
    for off-diagonal entries.
    """
    d_full = as_tensor(d_full)
    if d_full.ndim != 4 or d_full.shape[0] != d_full.shape[1]:
        raise ShapeError(f"expected CxCx2nxF gradient, got {d_full.shape}")
    if d_full.shape[2] % 2 != 0:
        raise ShapeError(f"channel count {d_full.shape[2]} is not even")
    half = d_full.shape[2] // 2
    channel_sum = d_full[:, :, :half, :] + d_full[:, :, half:, :]
    mirrored = channel_sum + channel_sum.transpose(1, 0, 2, 3)
    rows, cols = _tri_rows_cols(d_full.shape[0])
    packed = mirrored[rows, cols]
    diag = rows == cols
    packed[diag] = channel_sum[rows[diag], cols[diag]]
    return packed


def expand_pres(kernel):
    """Full C x C x m x F kernel from packed preserving parameters.

    Q[i, j, k, f] = packed[tri(max(i,j), min(i,j)), k, f].
    """
    full = kernel.packed[_tri_of(kernel.size)]
    return Conv2dKernel(weights=full, bias=kernel.bias)


def fold_pres_grad(d_full):
    """Packed gradient from a full-kernel gradient of a preserving kernel."""
    d_full = as_tensor(d_full)
    if d_full.ndim != 4 or d_full.shape[0] != d_full.shape[1]:
        raise ShapeError(f"expected CxCxmxF gradient, got {d_full.shape}")
    mirrored = d_full + d_full.transpose(1, 0, 2, 3)
    rows, cols = _tri_rows_cols(d_full.shape[0])
    packed = mirrored[rows, cols]
    diag = rows == cols
    packed[diag] = d_full[rows[diag], cols[diag]]
    return packed


def init_half_glorot(rng, fan_in, fan_out, packed_shape):
    """Uniform draws from (-b/2, b/2) with b = sqrt(6 / (fan_in + fan_out)).

    Half the usual Glorot bound: every stored entry appears twice per channel
    slice of the expanded kernel, so halving the bound restores the intended
    scale of the expanded weights.
    """
    if fan_in < 1 or fan_out < 1:
        raise ShapeError(f"fans must be >= 1, got {fan_in}, {fan_out}")
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return (bound / 2.0) * rng.uniform_signed(tuple(packed_shape))


def init_glorot(rng, fan_in, fan_out, shape):
    """Standard Glorot draws from (-b, b), for unconstrained kernels."""
    if fan_in < 1 or fan_out < 1:
        raise ShapeError(f"fans must be >= 1, got {fan_in}, {fan_out}")
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return bound * rng.uniform_signed(tuple(shape))


def new_gen_kernel(rng, size, half_channels, out_channels):
    """Freshly initialized generating kernel (half-Glorot weights, zero bias).

    Fans are those of the expanded kernel: C*C*2n in, C*C*F out.
    """
    packed_shape = (tri_count(size), half_channels, out_channels)
    packed = init_half_glorot(
        rng,
        size * size * 2 * half_channels,
        size * size * out_channels,
        packed_shape,
    )
    return SymGenKernel(
        packed=packed,
        size=size,
        half_channels=half_channels,
        out_channels=out_channels,
        bias=zeros((out_channels,)),
    )


def new_pres_kernel(rng, size, in_channels, out_channels):
    """Freshly initialized preserving kernel (half-Glorot weights, zero bias)."""
    packed_shape = (tri_count(size), in_channels, out_channels)
    packed = init_half_glorot(
        rng,
        size * size * in_channels,
        size * size * out_channels,
        packed_shape,
    )
    return SymPresKernel(
        packed=packed,
        size=size,
        in_channels=in_channels,
        out_channels=out_channels,
        bias=zeros((out_channels,)),
    )


def sym_gen_layer_forward(x_pair, kernel):
    """Convolve a self-Cartesian pair tensor with an expanded generating kernel.

    The output is spatially symmetric up to floating-point summation order.
    """
    x_pair = as_tensor(x_pair)
    if x_pair.ndim != 3 or x_pair.shape[2] != kernel.in_channels:
        raise ShapeError(
            f"pair tensor shape {x_pair.shape} incompatible with 2n={kernel.in_channels}"
        )
    return conv2d_forward(x_pair, expand_gen(kernel))


def sym_pres_layer_forward(z, kernel, check=True):
    """Convolve a symmetric pair tensor with an expanded preserving kernel.

    With ``check`` (the default) the input's asymmetry is verified to be at
    most 1e-9 first; unchecked mode skips the O(L^2 m) scan and computes
    regardless.
    """
    z = as_tensor(z)
    if z.ndim != 3 or z.shape[2] != kernel.in_channels:
        raise ShapeError(
            f"pair tensor shape {z.shape} incompatible with m={kernel.in_channels}"
        )
    if check:
        worst = asymmetry(z)
        if worst > SYMMETRY_INPUT_TOL:
            raise PreconditionError(
                f"input asymmetry {worst:g} exceeds {SYMMETRY_INPUT_TOL:g}"
            )
    return conv2d_forward(z, expand_pres(kernel))


def sym_layer_backward(x, kernel, upstream):
    """Backward pass of a symmetric layer: (d_packed, d_bias, d_input).

    ``x`` is the layer's forward input.  Runs the standard convolution
    backward on the expanded kernel, then folds the full-kernel gradient
    onto the packed parameters.
    """
    if isinstance(kernel, SymGenKernel):
        full, fold = expand_gen(kernel), fold_gen_grad
    elif isinstance(kernel, SymPresKernel):
        full, fold = expand_pres(kernel), fold_pres_grad
    else:
        raise ShapeError(f"not a packed symmetric kernel: {type(kernel).__name__}")
    grads = conv2d_backward(x, full, upstream)
    return fold(grads.d_weights), grads.d_bias, grads.d_input


def save_kernel(stem, kernel):
    """Write packed parameters, bias, and a text sidecar next to ``stem``.

    Produces ``<stem>.params.sct``, ``<stem>.bias.sct`` and
    ``<stem>.kernel.txt`` (key=value lines: kind, C, n or m, F).
    Round-trips bit-exactly.
    """
    stem = Path(stem)
    if isinstance(kernel, SymGenKernel):
        kind, chan_key, chan = "gen", "n", kernel.half_channels
    elif isinstance(kernel, SymPresKernel):
        kind, chan_key, chan = "pres", "m", kernel.in_channels
    else:
        raise ShapeError(f"not a packed symmetric kernel: {type(kernel).__name__}")
    save_tensor(stem.with_suffix(".params.sct"), kernel.packed)
    save_tensor(stem.with_suffix(".bias.sct"), kernel.bias)
    lines = [f"kind={kind}", f"C={kernel.size}", f"{chan_key}={chan}", f"F={kernel.out_channels}"]
    stem.with_suffix(".kernel.txt").write_text("\n".join(lines) + "\n")


def load_kernel(stem):
    """Load a kernel previously written by :func:`save_kernel`."""
    stem = Path(stem)
    header = {}
    for line in stem.with_suffix(".kernel.txt").read_text().splitlines():
        line = line.strip()
        if line:
            key, _, value = line.partition("=")
            header[key] = value
    packed = load_tensor(stem.with_suffix(".params.sct"))
    bias = load_tensor(stem.with_suffix(".bias.sct"))
    size, out_channels = int(header["C"]), int(header["F"])
    if header["kind"] == "gen":
        return SymGenKernel(
            packed=packed,
            size=size,
            half_channels=int(header["n"]),
            out_channels=out_channels,
            bias=bias,
        )
    if header["kind"] == "pres":
        return SymPresKernel(
            packed=packed,
            size=size,
            in_channels=int(header["m"]),
            out_channels=out_channels,
            bias=bias,
        )
    raise ShapeError(f"unknown kernel kind {header.get('kind')!r}")
