"""Raster file formats.

Rasters are plain numpy arrays: (H, W) float32 for depth maps and masks,
(H, W, 2) for gradient fields, (H, W, 3) for camera frames. The native
on-disk format (FRAS) is bit-exact for float32 data; PPM/PGM exports are
lossy 8-bit renderings for eyeballing.
"""

import struct

import numpy as np

from ._validate import check_raster

FRAS_MAGIC = b"FRAS"
FRAS_VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def fras_write(path, arr):
    """Write a raster to a FRAS file (little-endian float32, row-major)."""
    arr = check_raster(arr)
    data = np.ascontiguousarray(arr, dtype="<f4")
    h, w = data.shape[:2]
    c = 1 if data.ndim == 2 else data.shape[2]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FRAS_MAGIC, FRAS_VERSION, h, w, c))
        fh.write(data.tobytes())


def fras_read(path):
    """Read a FRAS file; returns (H, W) for one channel, (H, W, C) otherwise."""
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise ValueError(f"{path}: truncated FRAS header")
        magic, version, h, w, c = _HEADER.unpack(header)
        if magic != FRAS_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != FRAS_VERSION:
            raise ValueError(f"{path}: unsupported FRAS version {version}")
        payload = fh.read(h * w * c * 4)
    if len(payload) != h * w * c * 4:
        raise ValueError(f"{path}: truncated FRAS payload")
    arr = np.frombuffer(payload, dtype="<f4").reshape(h, w, c)
    return arr[:, :, 0].copy() if c == 1 else arr.copy()


def _to_u8(arr):
    return np.clip(np.rint(255.0 * np.asarray(arr, dtype=np.float64)), 0, 255).astype(np.uint8)


def ppm_write(path, frame):
    """Export an RGB frame as binary PPM (P6, 8-bit)."""
    frame = check_raster(frame, channels=3, name="frame")
    h, w = frame.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(_to_u8(frame).tobytes())


def pgm_write(path, image):
    """Export a single-channel raster (mask, depth) as binary PGM (P5, 8-bit)."""
    image = check_raster(image, channels=1, name="image")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(_to_u8(image).tobytes())
