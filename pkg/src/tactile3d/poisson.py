"""Spectral integration of gradient fields into depth maps.

Solves the discrete Poisson equation div(G) = laplacian(z) on the grid
interior with zero Dirichlet boundaries, using the type-I discrete sine
transform. The divergence is formed with the same central-difference stencil
as `geometry.depth_to_gradients` (one-sided at the borders); on data whose
raster boundary is zero that composite operator is diagonalized exactly by
the DST-I with per-mode eigenvalues

    lam_ij = -(sin(pi i / (H-1))^2 + sin(pi j / (W-1))^2),

so differentiating a zero-boundary surface and integrating it back is an
identity up to float rounding. All arithmetic is float64.
"""

import numpy as np
from scipy.fft import dstn, idstn

from ._validate import check_positive, check_raster


def poisson_solve(grads, ppmm=1.0):
    """Integrate a (H, W, 2) gradient field into a depth map in mm.

    The output boundary row/column is exactly zero. Output may be negative
    for non-integrable inputs; callers decide whether to clamp.
    """
    check_positive(ppmm, "ppmm")
    grads = check_raster(grads, channels=2, name="gradients", min_size=4).astype(np.float64)
    h, w = grads.shape[:2]
    div = np.gradient(grads[:, :, 0], axis=1) + np.gradient(grads[:, :, 1], axis=0)
    spectrum = dstn(div[1:-1, 1:-1], type=1)
    spectrum /= _eigenvalues(h, w)
    depth = np.zeros((h, w))
    depth[1:-1, 1:-1] = idstn(spectrum, type=1)
    depth /= ppmm
    return depth


def _eigenvalues(h, w):
    i = np.arange(1, h - 1)[:, None]
    j = np.arange(1, w - 1)[None, :]
    return -(np.sin(np.pi * i / (h - 1)) ** 2 + np.sin(np.pi * j / (w - 1)) ** 2)


def divergence_matrix(h, w):
    """Dense matrix of the interior Laplacian system the spectral solver inverts.

    Row k gives the composite central-difference divergence-of-gradient
    stencil at interior node k (row-major over the (h-2) x (w-2) interior),
    assuming zero raster boundary values. Intended as an independent oracle:
    `np.linalg.solve(divergence_matrix(h, w), div_interior)` must match the
    spectral solve.
    """
    m, n = h - 2, w - 2

    def axis_op(size):
        # 1D composite: second difference over a doubled stencil, with the
        # odd-extension boundary rows produced by one-sided edge gradients
        a = np.zeros((size, size))
        for k in range(size):
            if k - 2 >= 0:
                a[k, k - 2] += 0.25
            a[k, k] -= 0.5
            if k + 2 < size:
                a[k, k + 2] += 0.25
        a[0, 0] -= 0.25
        a[size - 1, size - 1] -= 0.25
        return a

    ay = axis_op(m)
    ax = axis_op(n)
    return np.kron(ay, np.eye(n)) + np.kron(np.eye(m), ax)
