"""Input validation helpers shared by the public entry points."""

import numpy as np


def check_raster(arr, channels=None, name="raster", min_size=2):
    """Validate a raster array and return it as float.

    Accepts (H, W) for single-channel data or (H, W, C). Raises ValueError on
    wrong rank, wrong channel count, undersized grids, or non-finite values.
    """
    arr = np.asarray(arr)
    if arr.ndim == 2:
        c = 1
    elif arr.ndim == 3:
        c = arr.shape[2]
    else:
        raise ValueError(f"{name}: expected 2D or 3D array, got shape {arr.shape}")
    if channels is not None and c != channels:
        raise ValueError(f"{name}: expected {channels} channel(s), got {c}")
    if arr.shape[0] < min_size or arr.shape[1] < min_size:
        raise ValueError(f"{name}: grid must be at least {min_size}x{min_size}, got {arr.shape[:2]}")
    if not np.issubdtype(arr.dtype, np.floating):
        arr = arr.astype(np.float32)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains non-finite values")
    return arr


def check_same_shape(a, b, name_a="first", name_b="second"):
    if a.shape != b.shape:
        raise ValueError(f"{name_a} shape {a.shape} does not match {name_b} shape {b.shape}")


def check_positive(value, name):
    if not (value > 0):
        raise ValueError(f"{name} must be positive, got {value}")


def check_mask(mask, shape=None, name="mask"):
    """Validate a 0/1 mask raster and return it as boolean."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"{name}: expected 2D array, got shape {mask.shape}")
    if shape is not None and mask.shape != shape:
        raise ValueError(f"{name}: shape {mask.shape} does not match expected {shape}")
    if mask.dtype == bool:
        return mask
    vals = np.unique(mask)
    if not np.all(np.isin(vals, (0.0, 1.0))):
        raise ValueError(f"{name}: values must be 0.0 or 1.0")
    return mask > 0.5


def check_points(points, name="points"):
    """Validate an (N, 3) point array in mm and return it as float64."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"{name}: expected (N, 3) array, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise ValueError(f"{name}: contains non-finite coordinates")
    return points
