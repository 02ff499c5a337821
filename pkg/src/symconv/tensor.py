"""Dense tensor helpers, the seeded RNG, and the SCT1 tensor file format.

Tensors are C-contiguous float64 ``numpy.ndarray``s throughout the package:
row-major with the last axis fastest.  Functions that produce tensors always
return arrays in that layout; :func:`as_tensor` normalizes caller input.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ShapeError

MAGIC = b"SCT1"

# Largest double-precision integer range; used to map raw integer draws onto
# the open interval (-1, 1) without ever hitting the endpoints.
_MANTISSA = 1 << 53


def as_tensor(values, shape=None):
    """Return ``values`` as a C-contiguous float64 array, optionally reshaped.

    Raises ShapeError if a requested ``shape`` disagrees with the data size.
    """
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if arr.size != int(np.prod(shape)):
            raise ShapeError(f"cannot view {arr.size} entries as shape {shape}")
        arr = arr.reshape(shape)
    return arr


def zeros(shape):
    """All-zero tensor of the given extents (every extent must be >= 1)."""
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ShapeError("shape must have at least one extent")
    if any(s < 1 for s in shape):
        raise ShapeError(f"extents must be >= 1, got {shape}")
    return np.zeros(shape, dtype=np.float64)


def transpose_spatial(t):
    """Swap the first two axes of an LxLxc (or LxL) tensor.

    The first two extents must be equal; the result o satisfies
    o[i, j, ...] = t[j, i, ...].
    """
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 2 or t.shape[0] != t.shape[1]:
        raise ShapeError(f"expected equal leading extents, got shape {t.shape}")
    return np.ascontiguousarray(np.swapaxes(t, 0, 1))


def max_abs_diff(a, b):
    """Largest elementwise |a - b|; zero iff the tensors are identical."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def asymmetry(t):
    """Largest |t[i,j,...] - t[j,i,...]|: zero iff spatially symmetric."""
    return max_abs_diff(t, transpose_spatial(t))


class Rng:
    """Deterministic counter-based random source (Philox under the hood).

    Equal seeds give bit-identical draw sequences across runs and platforms.
    A single Rng instance must not be shared across concurrent tasks.
    """

    def __init__(self, seed):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def uniform_signed(self, shape=None):
        """Uniform draws strictly inside the open interval (-1, 1)."""
        raw = self._gen.integers(1, _MANTISSA, size=shape)
        return 2.0 * (raw / _MANTISSA) - 1.0

    def integers(self, low, high, shape=None):
        """Integer draws in [low, high)."""
        return self._gen.integers(low, high, size=shape)

    def permutation(self, count):
        return self._gen.permutation(count)


def save_tensor(path, t):
    """Write a tensor to ``path`` in the SCT1 binary format.

    Layout: 4-byte magic ``SCT1``, u32 little-endian rank, rank u64
    little-endian extents, then the raw f64 little-endian entries in
    row-major order.
    """
    t = as_tensor(t)
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", t.ndim))
        fh.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        fh.write(t.astype("<f8", copy=False).tobytes(order="C"))


def load_tensor(path):
    """Read an SCT1 file back into a float64 array."""
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ShapeError(f"{path}: not an SCT1 file")
    (rank,) = struct.unpack_from("<I", raw, 4)
    if rank < 1:
        raise ShapeError(f"{path}: rank must be >= 1")
    shape = struct.unpack_from(f"<{rank}Q", raw, 8)
    offset = 8 + 8 * rank
    count = int(np.prod(shape))
    data = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    if data.size != count:
        raise ShapeError(f"{path}: truncated payload")
    return as_tensor(data.astype(np.float64), shape)
