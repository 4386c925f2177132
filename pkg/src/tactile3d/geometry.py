"""Surface gradients, normals, and rigid transforms.

Axis conventions used everywhere in this package: x runs along image columns
(increasing rightward), y along rows (increasing downward). Gx is dz/dx and
Gy is dz/dy, both dimensionless (mm per mm). Pixel (row, col) sits at
physical position (col / ppmm, row / ppmm) mm.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validate import check_points, check_positive, check_raster


def depth_to_gradients(depth, ppmm):
    """Differentiate a depth map into a (H, W, 2) gradient field.

    Central differences in the interior, one-sided at the borders. The pixel
    pitch is 1/ppmm mm, so outputs are slopes in mm/mm.
    """
    check_positive(ppmm, "ppmm")
    depth = check_raster(depth, channels=1, name="depth").astype(np.float64)
    gy = np.gradient(depth, 1.0 / ppmm, axis=0)
    gx = np.gradient(depth, 1.0 / ppmm, axis=1)
    return np.stack([gx, gy], axis=2)


def gradients_to_normals(grads):
    """Per-pixel unit surface normals n = (-Gx, -Gy, 1) / |(-Gx, -Gy, 1)|."""
    grads = check_raster(grads, channels=2, name="gradients").astype(np.float64)
    gx, gy = grads[:, :, 0], grads[:, :, 1]
    inv = 1.0 / np.sqrt(gx * gx + gy * gy + 1.0)
    return np.stack([-gx * inv, -gy * inv, inv], axis=2)


def _check_rotation(r):
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if not np.allclose(r.T @ r, np.eye(3), atol=1e-6):
        raise ValueError("rotation is not orthonormal within 1e-6")
    if not np.isclose(np.linalg.det(r), 1.0, atol=1e-6):
        raise ValueError("rotation determinant is not +1 within 1e-6")
    return r


@dataclass(frozen=True)
class RigidTransform:
    """Rotation plus translation in mm. Immutable; validated on construction."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        t = np.asarray(self.translation, dtype=np.float64)
        if t.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got shape {t.shape}")
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity():
        return RigidTransform()

    @staticmethod
    def from_axis_angle(axis, angle_rad, translation=(0.0, 0.0, 0.0)):
        """Rodrigues rotation about a (not necessarily unit) axis."""
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        kx, ky, kz = axis
        k = np.array([[0.0, -kz, ky], [kz, 0.0, -kx], [-ky, kx, 0.0]])
        rot = np.eye(3) + np.sin(angle_rad) * k + (1.0 - np.cos(angle_rad)) * (k @ k)
        return RigidTransform(rot, np.asarray(translation, dtype=np.float64))

    def apply(self, points):
        """Apply to an (N, 3) cloud: p' = R p + t."""
        points = check_points(points)
        return points @ self.rotation.T + self.translation

    def compose(self, other):
        """self.compose(other) applies `other` first, then `self`."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def invert(self):
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def rotation_angle_deg(self):
        """Magnitude of the rotation, in degrees."""
        c = (np.trace(self.rotation) - 1.0) / 2.0
        return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))
