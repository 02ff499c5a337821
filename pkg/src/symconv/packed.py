"""Triangle-only storage of symmetric feature maps and triangle-only inference.

A symmetric L x L x c feature map is stored as its upper triangle (i <= j,
row-wise, diagonal included): L(L+1)/2 entries per channel instead of L^2.
The convolution routines here produce the packed output directly, computing
only output positions with i <= j and reading mirrored entries whenever a
receptive field dips below the diagonal, so no full-size feature map is ever
materialized.  These paths are inference-only; training uses the full-shape
layers.

An :class:`OpMeter` can be passed to the convolutions to count
multiply-accumulates and track peak feature storage (in f64 entries), which
is how the roughly-half memory and compute savings are demonstrated.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .cartesian import as_sequence_features
from .errors import ConfigError, PreconditionError, ShapeError
from .symkernel import SYMMETRY_INPUT_TOL, expand_gen, expand_pres
from .tensor import as_tensor, asymmetry, load_tensor, save_tensor


class OpMeter:
    """Counts multiply-accumulates and tracks peak live feature entries."""

    def __init__(self):
        self.macs = 0
        self.feature_peak = 0
        self._live = 0

    def add_macs(self, count):
        self.macs += int(count)

    def alloc(self, entries):
        self._live += int(entries)
        self.feature_peak = max(self.feature_peak, self._live)

    def release(self, entries):
        self._live -= int(entries)


@dataclass(frozen=True)
class PackedSymFeature:
    """Upper-triangle storage of a symmetric pair tensor.

    ``data`` has shape (L*(L+1)/2, c) in row-wise upper-triangle order:
    (0,0), (0,1), ..., (0,L-1), (1,1), (1,2), ...
    """

    length: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        if self.length < 1 or self.channels < 1:
            raise ShapeError(f"invalid dims L={self.length}, c={self.channels}")
        count = self.length * (self.length + 1) // 2
        data = as_tensor(self.data, (count, self.channels))
        object.__setattr__(self, "data", data)

    @property
    def entry_count(self):
        return int(self.data.size)


def packed_entry_count(length, channels=1):
    return length * (length + 1) // 2 * channels


def storage_ratio(length):
    """Packed / full entry count for one channel: (L+1) / (2L)."""
    return (length + 1) / (2 * length)


def full_feature_entries(length, in_channels, out_channels):
    """Feature entries the full (unpacked) path materializes: input + output."""
    return length * length * (in_channels + out_channels)


def _row_starts(length):
    """Packed position of (s, s), the first entry of output row s."""
    rows = np.arange(length)
    return rows * length - rows * (rows - 1) // 2


def pack(z, tol=SYMMETRY_INPUT_TOL):
    """Store the upper triangle of a symmetric L x L x c tensor.

    Inputs whose asymmetry exceeds ``tol`` are rejected.
    """
    z = as_tensor(z)
    if z.ndim != 3 or z.shape[0] != z.shape[1]:
        raise ShapeError(f"expected L x L x c tensor, got {z.shape}")
    worst = asymmetry(z)
    if worst > tol:
        raise PreconditionError(f"asymmetry {worst:g} exceeds {tol:g}")
    iu, ju = np.triu_indices(z.shape[0])
    return PackedSymFeature(length=z.shape[0], channels=z.shape[2], data=z[iu, ju])


def unpack(packed):
    """Full symmetric L x L x c tensor with the lower triangle mirrored."""
    length = packed.length
    z = np.empty((length, length, packed.channels), dtype=np.float64)
    iu, ju = np.triu_indices(length)
    z[iu, ju] = packed.data
    z[ju, iu] = packed.data
    return z


def _check_kernel(packed, size, in_channels):
    if size % 2 == 0:
        raise ConfigError(f"kernel size must be odd, got {size}")
    if packed.channels != in_channels:
        raise ShapeError(
            f"feature has {packed.channels} channels, kernel expects {in_channels}"
        )


def packed_sym_conv(packed, kernel, meter=None):
    """Triangle-only convolution with a symmetry-preserving kernel.

    Equals pack(conv(unpack(packed), expanded kernel)) but touches only
    output positions with i <= j, reconstructing each needed input row from
    packed storage via mirrored reads.  Multiply-accumulates total exactly
    L(L+1)/2 * C^2 * m * F.
    """
    _check_kernel(packed, kernel.size, kernel.in_channels)
    weights = expand_pres(kernel).weights
    out = _triangle_conv(packed.length, _PackedRows(packed), weights, kernel.bias, meter)
    return PackedSymFeature(length=packed.length, channels=kernel.out_channels, data=out)


def packed_sym_gen_conv(x, kernel, meter=None):
    """Triangle-only generating convolution straight from a feature sequence.

    Equals pack(conv(self_cartesian(x), expanded kernel)) but materializes
    only the C-row band of the pair tensor needed for the current output row,
    never the full L x L x 2n lift.
    """
    x = as_sequence_features(x)
    if x.shape[1] != kernel.half_channels:
        raise ShapeError(
            f"sequence width {x.shape[1]} incompatible with n={kernel.half_channels}"
        )
    if kernel.size % 2 == 0:
        raise ConfigError(f"kernel size must be odd, got {kernel.size}")
    weights = expand_gen(kernel).weights
    length = x.shape[0]
    if meter is not None:
        meter.alloc(x.size)
    out = _triangle_conv(length, _CartesianRows(x), weights, kernel.bias, meter)
    if meter is not None:
        meter.release(x.size)
    return PackedSymFeature(length=length, channels=kernel.out_channels, data=out)


class _PackedRows:
    """Row provider reading a symmetric map out of packed storage."""

    def __init__(self, packed):
        self._data = packed.data
        self._starts = _row_starts(packed.length)
        self._cols = np.arange(packed.length)
        self.channels = packed.channels
        self.live_entries = packed.entry_count

    def fill(self, row, dest):
        cols = self._cols
        # mirrored read: entry (row, b) lives at the packed slot of the
        # ordered pair (min(row, b), max(row, b))
        idx = np.where(
            cols >= row,
            self._starts[row] + cols - row,
            self._starts[cols] + row - cols,
        )
        dest[:] = self._data[idx]


class _CartesianRows:
    """Row provider building self-Cartesian fibers on the fly."""

    def __init__(self, x):
        self._x = x
        self.channels = 2 * x.shape[1]
        self.live_entries = 0  # the sequence itself is accounted by the caller

    def fill(self, row, dest):
        width = self._x.shape[1]
        dest[:, :width] = self._x[row]
        dest[:, width:] = self._x


def _triangle_conv(length, rows, weights, bias, meter):
    """Shared i <= j convolution driver over a row provider."""
    size, channels, out_channels = weights.shape[0], weights.shape[2], weights.shape[3]
    pad = (size - 1) // 2
    out = np.empty((length * (length + 1) // 2, out_channels), dtype=np.float64)
    band = np.zeros((size, length + 2 * pad, channels), dtype=np.float64)
    if meter is not None:
        meter.alloc(rows.live_entries)
        meter.alloc(band.size)
        meter.alloc(out.size)
    starts = _row_starts(length)
    for s in range(length):
        band[:] = 0.0
        for offset in range(size):
            row = s - pad + offset
            if 0 <= row < length:
                rows.fill(row, band[offset, pad : pad + length])
        # windows[a, t, k, b] = band[a, t + b, k]; only columns t >= s are
        # needed for the upper triangle.
        windows = sliding_window_view(band, size, axis=1)[:, s:length]
        if meter is not None:
            meter.alloc(windows.size)
        row_out = np.einsum("atkb,abkf->tf", windows, weights, optimize=True)
        if meter is not None:
            meter.add_macs(row_out.shape[0] * size * size * channels * out_channels)
            meter.release(windows.size)
        out[starts[s] : starts[s] + (length - s)] = row_out + bias
    if meter is not None:
        meter.release(rows.live_entries)
        meter.release(band.size)
        meter.release(out.size)
    return out


def save_packed(stem, packed):
    """Write packed data plus a sidecar recording the spatial size L."""
    stem = Path(stem)
    save_tensor(stem.with_suffix(".packed.sct"), packed.data)
    stem.with_suffix(".packed.txt").write_text(f"L={packed.length}\n")


def load_packed(stem):
    stem = Path(stem)
    data = load_tensor(stem.with_suffix(".packed.sct"))
    header = stem.with_suffix(".packed.txt").read_text()
    length = int(header.strip().partition("=")[2])
    return PackedSymFeature(length=length, channels=data.shape[1], data=data)
