"""Frame-level preprocessing: perspective unwarp, background subtraction,
contact-circle fitting, and gradient inpainting under tracking markers."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation, binary_erosion
from scipy.spatial import cKDTree

from ._validate import check_mask, check_raster, check_same_shape
from .errors import NoContactError


def _homography_from_quad(src_quad, out_shape):
    """3x3 map taking output-rectangle coordinates to source-quad coordinates."""
    src = np.asarray(src_quad, dtype=np.float64)
    if src.shape != (4, 2):
        raise ValueError(f"quad must be four (x, y) corners, got shape {src.shape}")
    cross = []
    for i in range(4):
        a = src[(i + 1) % 4] - src[i]
        b = src[(i + 2) % 4] - src[(i + 1) % 4]
        cross.append(a[0] * b[1] - a[1] * b[0])
    cross = np.asarray(cross)
    if np.any(np.abs(cross) < 1e-9) or not (np.all(cross > 0) or np.all(cross < 0)):
        raise ValueError("quad corners must form a strictly convex quadrilateral")
    h, w = out_shape
    dst = np.array([[0.0, 0.0], [w - 1.0, 0.0], [w - 1.0, h - 1.0], [0.0, h - 1.0]])
    a = np.zeros((8, 8))
    rhs = np.zeros(8)
    for k, ((u, v), (x, y)) in enumerate(zip(dst, src)):
        a[2 * k] = [u, v, 1, 0, 0, 0, -x * u, -x * v]
        a[2 * k + 1] = [0, 0, 0, u, v, 1, -y * u, -y * v]
        rhs[2 * k] = x
        rhs[2 * k + 1] = y
    try:
        coef = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("degenerate quad: homography is singular") from exc
    return np.append(coef, 1.0).reshape(3, 3)


def _bilinear(frame, xs, ys):
    """Sample at float coordinates; anything outside the frame reads as 0."""
    h, w = frame.shape[:2]
    valid = (xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)
    xc = np.clip(xs, 0, w - 1)
    yc = np.clip(ys, 0, h - 1)
    x0 = np.clip(np.floor(xc).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(yc).astype(int), 0, h - 2)
    fx = (xc - x0)[..., None]
    fy = (yc - y0)[..., None]
    img = frame[:, :, None] if frame.ndim == 2 else frame
    top = img[y0, x0] * (1 - fx) + img[y0, x0 + 1] * fx
    bot = img[y0 + 1, x0] * (1 - fx) + img[y0 + 1, x0 + 1] * fx
    out = top * (1 - fy) + bot * fy
    out[~valid] = 0.0
    return out[..., 0] if frame.ndim == 2 else out


def unwarp(frame, src_quad, out_shape):
    """Map a convex source quad onto an axis-aligned rectangle.

    Corners are ordered top-left, top-right, bottom-right, bottom-left in
    (x, y) pixel coordinates. Bilinear sampling; out-of-frame samples are 0.
    """
    frame = check_raster(frame, name="frame")
    h, w = out_shape
    if h < 2 or w < 2:
        raise ValueError("output must be at least 2x2")
    hom = _homography_from_quad(src_quad, out_shape)
    us, vs = np.meshgrid(np.arange(w, dtype=np.float64),
                         np.arange(h, dtype=np.float64))
    denom = hom[2, 0] * us + hom[2, 1] * vs + hom[2, 2]
    xs = (hom[0, 0] * us + hom[0, 1] * vs + hom[0, 2]) / denom
    ys = (hom[1, 0] * us + hom[1, 1] * vs + hom[1, 2]) / denom
    return _bilinear(frame, xs, ys).astype(np.float32)


def diff_image(frame, background):
    """Signed difference frame - background; negative values are meaningful."""
    frame = check_raster(frame, name="frame")
    background = check_raster(background, name="background")
    check_same_shape(frame, background, "frame", "background")
    return (frame.astype(np.float32) - background.astype(np.float32))


@dataclass(frozen=True)
class CircleFit:
    center_x: float
    center_y: float
    radius: float
    inlier_rms: float


def contact_region(diff, threshold=0.05):
    """Boolean mask of pixels whose strongest channel change exceeds threshold."""
    diff = check_raster(diff, name="diff")
    mag = np.abs(diff)
    if mag.ndim == 3:
        mag = mag.max(axis=2)
    return mag > threshold


def fit_contact_circle(diff, threshold=0.05):
    """Least-squares circle through the boundary of the thresholded region.

    Algebraic (Kasa) fit: linear least squares on x^2 + y^2 against the
    circle parameters. Raises NoContactError when fewer than 10 pixels are
    active.
    """
    region = contact_region(diff, threshold)
    if int(region.sum()) < 10:
        raise NoContactError(
            f"only {int(region.sum())} pixels above threshold {threshold}")
    boundary = region & ~binary_erosion(region, border_value=0)
    ys, xs = np.nonzero(boundary)
    a = np.column_stack([2.0 * xs, 2.0 * ys, np.ones_like(xs, dtype=np.float64)])
    rhs = xs.astype(np.float64) ** 2 + ys.astype(np.float64) ** 2
    (cx, cy, c), *_ = np.linalg.lstsq(a, rhs, rcond=None)
    radius = float(np.sqrt(max(c + cx * cx + cy * cy, 0.0)))
    if radius <= 0:
        raise NoContactError("degenerate contact region")
    dist = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    return CircleFit(float(cx), float(cy), radius, float(np.sqrt(np.mean((dist - radius) ** 2))))


def _disk(radius):
    r = int(np.ceil(radius))
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return xx * xx + yy * yy <= radius * radius


def _nearest_donor_map(mask):
    """For every masked pixel, the coordinates of its nearest unmasked pixel.

    Searching only unmasked pixels 8-adjacent to the mask is exact: any
    nearest donor has a masked pixel among its neighbors toward the query,
    and so do all of its distance ties. Ties resolve to the smallest (row,
    col). Returns (query_rows, query_cols, donor_rows, donor_cols).
    """
    ring = ~mask & binary_dilation(mask, structure=_disk(1.5))
    if not ring.any():
        ring = ~mask
    dy, dx = np.nonzero(ring)
    pts = np.column_stack([dy, dx]).astype(np.float64)
    qy, qx = np.nonzero(mask)
    queries = np.column_stack([qy, qx]).astype(np.float64)
    tree = cKDTree(pts)
    k = min(2, len(pts))
    dist, idx = tree.query(queries, k=k)
    if k == 1:
        dist = dist[:, None]
        idx = idx[:, None]
    # squared pixel distances are integers, so ties are detected exactly
    d2 = np.rint(dist[:, 0] ** 2).astype(np.int64)
    chosen = idx[:, 0].copy()
    if k == 2:
        tied = np.rint(dist[:, 1] ** 2).astype(np.int64) == d2
        for qi in np.nonzero(tied)[0]:
            cand = tree.query_ball_point(queries[qi], np.sqrt(d2[qi]) + 1e-6)
            cand = [c for c in cand
                    if (pts[c, 0] - queries[qi, 0]) ** 2
                    + (pts[c, 1] - queries[qi, 1]) ** 2 == d2[qi]]
            chosen[qi] = min(cand, key=lambda c: (pts[c, 0], pts[c, 1]))
    return qy, qx, dy[chosen], dx[chosen]


def _idw_weights(mask, window_px=3):
    """Donor coordinates and normalized inverse-square-distance weights.

    Donors are the unmasked pixels inside the mask dilated by `window_px`;
    returns None when that window is empty (caller falls back to nearest).
    """
    donors = ~mask & binary_dilation(mask, structure=_disk(window_px))
    if not donors.any():
        return None
    dy, dx = np.nonzero(donors)
    qy, qx = np.nonzero(mask)
    d2 = ((qy[:, None] - dy[None, :]).astype(np.float64) ** 2
          + (qx[:, None] - dx[None, :]).astype(np.float64) ** 2)
    wgt = 1.0 / d2
    wgt /= wgt.sum(axis=1, keepdims=True)
    return qy, qx, dy, dx, wgt


def interpolate_marker_gradients(grads, mask, method="nearest"):
    """Replace gradient values under marker dots.

    method 'zero' writes zeros, 'nearest' copies the nearest unmasked pixel
    (ties broken toward smaller row, then column), 'linear' takes an
    inverse-distance-weighted average of unmasked pixels within a 3 px
    dilation of the mask. Unmasked pixels pass through bit-identically.
    """
    grads = check_raster(grads, channels=2, name="gradients")
    mask = check_mask(mask, shape=grads.shape[:2])
    if method not in ("zero", "nearest", "linear"):
        raise ValueError(f"unknown method {method!r}")
    if mask.all():
        raise ValueError("mask covers the entire raster; nothing to sample from")
    out = grads.copy()
    if not mask.any():
        return out
    if method == "zero":
        out[mask] = 0.0
        return out
    if method == "linear":
        idw = _idw_weights(mask)
        if idw is not None:
            qy, qx, dy, dx, wgt = idw
            for ch in range(2):
                out[qy, qx, ch] = wgt @ grads[dy, dx, ch].astype(np.float64)
            return out
    qy, qx, ny, nx = _nearest_donor_map(mask)
    out[qy, qx, :] = grads[ny, nx, :]
    return out
