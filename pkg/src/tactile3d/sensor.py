"""Forward optics simulator.

Renders the RGB frame a colored-light tactile sensor would observe for a
given indentation depth map, and generates the scenes used for calibration
and training: calibration-ball presses (with exact analytic slopes), random
blob surfaces, marker overlays, and posed cube-corner indentations.

Channel geometry: green enters from the left edge and encodes the x slope;
red enters from the top and blue from the bottom, encoding the y slope with
opposite signs. Each light decays exponentially with distance from its entry
edge. Shading is Lambertian with a per-channel ambient floor.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from ._validate import check_positive, check_raster
from .geometry import RigidTransform, depth_to_gradients, gradients_to_normals

CHANNELS = ("R", "G", "B")
EDGES = ("top", "bottom", "left", "right")


@dataclass(frozen=True)
class LightSpec:
    channel: str
    direction: tuple            # incoming unit vector at the gel surface, z < 0
    entry_edge: str
    attenuation_lambda: float = 40.0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.entry_edge not in EDGES:
            raise ValueError(f"entry_edge must be one of {EDGES}, got {self.entry_edge!r}")
        d = np.asarray(self.direction, dtype=np.float64)
        if d.shape != (3,) or not np.isclose(np.linalg.norm(d), 1.0, atol=1e-6):
            raise ValueError("direction must be a unit 3-vector")
        if d[2] >= 0:
            raise ValueError("direction must point onto the surface (negative z)")
        check_positive(self.attenuation_lambda, "attenuation_lambda")
        object.__setattr__(self, "direction", tuple(float(v) for v in d))


def default_lights(elevation_deg=30.0, attenuation_lambda=40.0):
    """Green from the left, red from the top, blue from the bottom."""
    c = float(np.cos(np.deg2rad(elevation_deg)))
    s = float(np.sin(np.deg2rad(elevation_deg)))
    return (
        LightSpec("R", (0.0, c, -s), "top", attenuation_lambda),
        LightSpec("G", (c, 0.0, -s), "left", attenuation_lambda),
        LightSpec("B", (0.0, -c, -s), "bottom", attenuation_lambda),
    )


@dataclass(frozen=True)
class SensorConfig:
    height: int = 150
    width: int = 200
    ppmm: float = 10.0
    lights: tuple = field(default_factory=default_lights)
    ambient: float = 0.05
    albedo: float = 0.9

    def __post_init__(self):
        if self.height < 2 or self.width < 2:
            raise ValueError("sensor raster must be at least 2x2")
        check_positive(self.ppmm, "ppmm")
        if not 1 <= len(self.lights) <= 3:
            raise ValueError("between 1 and 3 lights required")
        chans = [l.channel for l in self.lights]
        if len(set(chans)) != len(chans):
            raise ValueError("each light must use a distinct color channel")
        if not 0.0 <= self.ambient <= 0.2:
            raise ValueError("ambient must lie in [0, 0.2]")
        if not 0.0 < self.albedo <= 1.0:
            raise ValueError("albedo must lie in (0, 1]")
        object.__setattr__(self, "lights", tuple(self.lights))

    @property
    def shape(self):
        return (self.height, self.width)

    def subset(self, channels):
        """Copy of this config keeping only the lights for `channels`."""
        kept = tuple(l for l in self.lights if l.channel in channels)
        if not kept:
            raise ValueError(f"no lights left for channels {channels!r}")
        return SensorConfig(self.height, self.width, self.ppmm, kept,
                            self.ambient, self.albedo)

    def to_dict(self):
        return {
            "height": self.height,
            "width": self.width,
            "ppmm": self.ppmm,
            "lights": [
                {
                    "channel": l.channel,
                    "direction": list(l.direction),
                    "entry_edge": l.entry_edge,
                    "attenuation_lambda": l.attenuation_lambda,
                }
                for l in self.lights
            ],
            "ambient": self.ambient,
            "albedo": self.albedo,
        }

    @staticmethod
    def from_dict(d):
        lights = tuple(
            LightSpec(l["channel"], tuple(l["direction"]), l["entry_edge"],
                      l["attenuation_lambda"])
            for l in d["lights"]
        )
        return SensorConfig(d["height"], d["width"], d["ppmm"], lights,
                            d["ambient"], d["albedo"])

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @staticmethod
    def from_json(path):
        with open(path) as fh:
            return SensorConfig.from_dict(json.load(fh))


def _edge_distance_mm(edge, config):
    rows = np.arange(config.height, dtype=np.float64)[:, None]
    cols = np.arange(config.width, dtype=np.float64)[None, :]
    if edge == "left":
        d = np.broadcast_to(cols, config.shape)
    elif edge == "right":
        d = np.broadcast_to(config.width - 1 - cols, config.shape)
    elif edge == "top":
        d = np.broadcast_to(rows, config.shape)
    else:
        d = np.broadcast_to(config.height - 1 - rows, config.shape)
    return d / config.ppmm


def render_frame(depth, config):
    """Render the RGB frame observed for an indentation depth map (mm).

    Per pixel and light: ambient + albedo * max(0, n . -dir) * exp(-d / lambda)
    with n the unit surface normal and d the distance from the light's entry
    edge, clamped to [0, 1]. Channels with no bound light stay at the ambient
    floor. Deterministic.
    """
    depth = check_raster(depth, channels=1, name="depth")
    if depth.shape != config.shape:
        raise ValueError(f"depth shape {depth.shape} does not match sensor {config.shape}")
    if depth.min() < 0:
        raise ValueError("depth must be non-negative")
    normals = gradients_to_normals(depth_to_gradients(depth, config.ppmm))
    frame = np.full((config.height, config.width, 3), config.ambient, dtype=np.float64)
    for light in config.lights:
        d = np.asarray(light.direction)
        lambert = np.maximum(-(normals @ d), 0.0)
        falloff = np.exp(-_edge_distance_mm(light.entry_edge, config)
                         / light.attenuation_lambda)
        frame[:, :, CHANNELS.index(light.channel)] += config.albedo * lambert * falloff
    return np.clip(frame, 0.0, 1.0).astype(np.float32)


def render_background(config):
    """Frame of the untouched sensor: the all-zeros depth map rendered."""
    return render_frame(np.zeros(config.shape, dtype=np.float32), config)


@dataclass(frozen=True)
class BallPress:
    """A sphere of known radius pressed into the gel."""

    ball_radius: float = 2.4
    press_depth: float = 0.6
    center: tuple = (0.0, 0.0)  # (x, y) mm in the sensor plane

    def __post_init__(self):
        check_positive(self.ball_radius, "ball_radius")
        if not 0.0 < self.press_depth < self.ball_radius:
            raise ValueError("press_depth must lie in (0, ball_radius)")

    @property
    def contact_radius(self):
        r, d = self.ball_radius, self.press_depth
        return float(np.sqrt(r * r - (r - d) * (r - d)))


def gen_ball_press(press, config):
    """Depth map, contact mask, and exact analytic slopes for a ball press.

    Inside the contact circle z = sqrt(R^2 - rho^2) - (R - d); the slopes are
    Gx = -x / sqrt(R^2 - rho^2), Gy = -y / sqrt(R^2 - rho^2) with (x, y)
    offsets from the press center. Raises if the circle leaves the raster.
    """
    cx, cy = press.center
    r = press.contact_radius
    xmax = (config.width - 1) / config.ppmm
    ymax = (config.height - 1) / config.ppmm
    if cx - r < 0 or cy - r < 0 or cx + r > xmax or cy + r > ymax:
        raise ValueError(
            f"contact circle (center {press.center}, r={r:.3f} mm) exceeds the "
            f"{ymax:.1f}x{xmax:.1f} mm raster")
    x = np.arange(config.width, dtype=np.float64)[None, :] / config.ppmm - cx
    y = np.arange(config.height, dtype=np.float64)[:, None] / config.ppmm - cy
    rho2 = x * x + y * y
    inside = rho2 < r * r
    cap = np.sqrt(np.maximum(press.ball_radius ** 2 - rho2, 1e-18))
    depth = np.where(inside, cap - (press.ball_radius - press.press_depth), 0.0)
    gx = np.where(inside, -x / cap, 0.0)
    gy = np.where(inside, -y / cap, 0.0)
    return (depth.astype(np.float32), inside.astype(np.float32),
            np.stack([gx, gy], axis=2).astype(np.float32))


@dataclass(frozen=True)
class SurfaceGenParams:
    blur_sigma_range: tuple = (0.2, 0.8)     # mm
    max_height_range: tuple = (0.3, 1.5)     # mm
    boundary_band: int = 8                   # pixels
    seed: int | None = None

    def __post_init__(self):
        for name in ("blur_sigma_range", "max_height_range"):
            lo, hi = getattr(self, name)
            if not (0 < lo <= hi):
                raise ValueError(f"{name} must be positive and ordered")
        if self.boundary_band < 1:
            raise ValueError("boundary_band must be at least 1")


def gen_random_surface(shape, params, rng, ppmm=10.0):
    """Random smooth indentation following the blob recipe.

    Uniform [-1, 1] noise, cubed for contrast, boundary band zeroed, Gaussian
    blurred with a sigma drawn from the configured mm range, negatives
    clipped, boundary band re-zeroed, and rescaled to a drawn peak height.
    Deterministic for a given generator state.
    """
    h, w = shape
    if h < 16 or w < 16:
        raise ValueError(f"surface must be at least 16x16, got {shape}")
    band = params.boundary_band
    field_ = rng.uniform(-1.0, 1.0, (h, w)) ** 3
    sigma_mm = rng.uniform(*params.blur_sigma_range)
    height = rng.uniform(*params.max_height_range)
    field_[:band, :] = 0.0
    field_[-band:, :] = 0.0
    field_[:, :band] = 0.0
    field_[:, -band:] = 0.0
    z = gaussian_filter(field_, sigma_mm * ppmm, mode="reflect", truncate=3.0)
    np.clip(z, 0.0, None, out=z)
    # the blur bleeds into the band; the zero-boundary contract wins
    z[:band, :] = 0.0
    z[-band:, :] = 0.0
    z[:, :band] = 0.0
    z[:, -band:] = 0.0
    peak = z.max()
    if peak > 0:
        z *= height / peak
    return z.astype(np.float32)


def overlay_markers(frame, grid_pitch_mm, dot_radius_mm, config):
    """Stamp a regular grid of dark dots onto a frame.

    Dot pixels have their channel values multiplied by 0.1; the returned mask
    is 1.0 exactly at modified pixels. Dot centers sit between pixel samples,
    so a radius under half a pixel marks nothing.
    """
    frame = check_raster(frame, channels=3, name="frame")
    if not dot_radius_mm < grid_pitch_mm / 2:
        raise ValueError("dot_radius must be smaller than half the grid pitch")
    h, w = frame.shape[:2]
    pitch = grid_pitch_mm * config.ppmm
    radius = dot_radius_mm * config.ppmm
    cys = np.arange(0.5 * pitch, h, pitch)
    cxs = np.arange(0.5 * pitch, w, pitch)
    # pixel sample points at (row + 0.5, col + 0.5) in continuous coordinates
    rows = np.arange(h, dtype=np.float64)[:, None] + 0.5
    cols = np.arange(w, dtype=np.float64)[None, :] + 0.5
    mask = np.zeros((h, w), dtype=bool)
    for cy in cys:
        for cx in cxs:
            mask |= (rows - cy) ** 2 + (cols - cx) ** 2 < radius * radius
    out = frame.copy()
    out[mask] = out[mask] * np.float32(0.1)
    return out, mask.astype(np.float32)


# ---------------------------------------------------------------------------
# cube-corner fixtures for pose tracking

def _corner_axes():
    """Edge directions of a cube balanced on its corner, deepest point first.

    In indentation coordinates (z positive into the gel) the three edges
    leave the vertex with equal negative z components.
    """
    v1 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    target = np.array([0.0, 0.0, -1.0])
    axis = np.cross(v1, target)
    angle = float(np.arccos(np.clip(v1 @ target, -1.0, 1.0)))
    rot = RigidTransform.from_axis_angle(axis, angle).rotation
    return rot.T.copy()  # rows: the three rotated cube edges


def cube_corner_cloud(size_mm=20.0, points_per_mm2=4.0):
    """Sample the three faces adjacent to a cube corner, vertex at the origin.

    Each face contributes its quarter nearest the vertex, sampled on a
    uniform grid of the requested areal density.
    """
    axes = _corner_axes()
    extent = size_mm / 2.0
    step = 1.0 / np.sqrt(points_per_mm2)
    ticks = np.arange(step / 2.0, extent, step)
    a, b = np.meshgrid(ticks, ticks, indexing="ij")
    points = []
    for i in range(3):
        e1 = axes[(i + 1) % 3]
        e2 = axes[(i + 2) % 3]
        points.append(a.ravel()[:, None] * e1 + b.ravel()[:, None] * e2)
    return np.concatenate(points, axis=0)


def gen_cube_corner_depth(pose, config):
    """Depth map of a posed cube corner pressed into the gel.

    `pose` maps the canonical corner (vertex at origin, deepest point down)
    into sensor coordinates; its translation z is the press depth in mm.
    Only the three vertex-adjacent faces bound the surface at sane depths.
    """
    axes = (pose.rotation @ _corner_axes().T).T
    if np.any(axes[:, 2] >= 0):
        raise ValueError("pose tilts the corner too far; an edge no longer rises")
    vertex = pose.translation
    x = np.arange(config.width, dtype=np.float64)[None, :] / config.ppmm
    y = np.arange(config.height, dtype=np.float64)[:, None] / config.ppmm
    bound = np.full(config.shape, np.inf)
    for e in axes:
        # halfspace (q - vertex) . e >= 0 solved for the depth coordinate
        plane = (vertex @ e - x * e[0] - y * e[1]) / e[2]
        np.minimum(bound, plane, out=bound)
    return np.maximum(bound, 0.0).astype(np.float32)
