"""Binary container I/O: IDX image files and NPY v1.0 sequence files.

Sequences travel as a single NPY v1.0 array (magic ``\\x93NUMPY``, header
dtype descriptor ``<f4``) with shape [count, length, height, width], little
endian float32. IDX is the classic big-endian image container: magic
0x00000803, then one unsigned 32-bit dimension per axis (count, rows, cols),
then raw unsigned bytes.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803


def read_idx_images(path) -> np.ndarray:
    """Read an IDX unsigned-byte image file into a (count, rows, cols) array."""
    raw = Path(path).read_bytes()
    if len(raw) < 16:
        raise ValueError(f"{path}: truncated IDX header ({len(raw)} bytes)")
    magic, count, rows, cols = struct.unpack(">iiii", raw[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise ValueError(f"{path}: bad IDX magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
    expected = 16 + count * rows * cols
    if len(raw) < expected:
        raise ValueError(f"{path}: truncated IDX payload ({len(raw)} < {expected} bytes)")
    data = np.frombuffer(raw, dtype=np.uint8, count=count * rows * cols, offset=16)
    return data.reshape(count, rows, cols).copy()


def write_idx_images(path, images: np.ndarray) -> None:
    """Write a (count, rows, cols) uint8 array in IDX image format."""
    arr = np.asarray(images)
    if arr.ndim != 3:
        raise ValueError(f"images must be (count, rows, cols), got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"images must be uint8, got {arr.dtype}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", IDX_IMAGE_MAGIC, *arr.shape))
        fh.write(arr.tobytes())


def write_sequences(path, sequences) -> None:
    """Write sequences as one float32 NPY v1.0 array [count, length, H, W]."""
    if isinstance(sequences, np.ndarray):
        stack = sequences
    else:
        sequences = list(sequences)
        if not sequences:
            raise ValueError("cannot write an empty sequence list")
        stack = np.stack([np.asarray(s) for s in sequences])
    if stack.ndim != 4:
        raise ValueError(f"sequences must stack to 4D [count, length, H, W], got {stack.shape}")
    out = np.ascontiguousarray(stack, dtype="<f4")
    with open(path, "wb") as fh:
        np.lib.format.write_array(fh, out, version=(1, 0))


def read_sequences(path) -> np.ndarray:
    """Read a sequence container written by :func:`write_sequences`."""
    with open(path, "rb") as fh:
        arr = np.lib.format.read_array(fh)
    if arr.ndim != 4:
        raise ValueError(f"{path}: expected 4D [count, length, H, W], got shape {arr.shape}")
    if arr.dtype != np.float32:
        raise ValueError(f"{path}: expected little-endian float32 payload, got {arr.dtype}")
    return arr
