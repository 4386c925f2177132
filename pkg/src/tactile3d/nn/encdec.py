"""Three-level encoder-decoder with skip connections for raster-to-raster
regression (one input channel, one output channel).

Downsampling is 2x2 average pooling, upsampling is nearest-neighbor followed
by a 3x3 convolution, and skip tensors are concatenated at matching
resolutions. Hidden activations are ReLU; the output convolution is linear.
Convolutions are evaluated as nine shifted slice-copies feeding one matmul,
which keeps the whole pass inside BLAS; backward passes recompute the column
matrices from cached layer inputs instead of holding them.
"""

import numpy as np

from .common import TrainConfig, TrainResult, run_epochs, split_validation


def _layout(channels):
    c1, c2, c3 = channels
    return [
        ("enc1a", 1, c1), ("enc1b", c1, c1),
        ("enc2a", c1, c2), ("enc2b", c2, c2),
        ("mida", c2, c3), ("midb", c3, c3),
        ("up2", c3, c2), ("dec2", 2 * c2, c2),
        ("up1", c2, c1), ("dec1", 2 * c1, c1),
        ("out", c1, 1),
    ]


class EncDecWeights:
    """Kernels stored as (9 * c_in, c_out) matrices keyed by layer name."""

    def __init__(self, tensors, channels):
        self.channels = tuple(int(c) for c in channels)
        if len(self.channels) != 3 or min(self.channels) < 1:
            raise ValueError(f"need three positive channel counts, got {channels}")
        self.tensors = {}
        for name, ci, co in _layout(self.channels):
            if name not in tensors:
                raise ValueError(f"missing tensor pair for layer {name}")
            k, b = tensors[name]
            k = np.asarray(k)
            b = np.asarray(b)
            if k.shape != (9 * ci, co) or b.shape != (co,):
                raise ValueError(f"layer {name}: bad tensor shapes {k.shape}, {b.shape}")
            if not (np.all(np.isfinite(k)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {name}: non-finite values")
            self.tensors[name] = (k, b)

    @property
    def dtype(self):
        return self.tensors["enc1a"][0].dtype

    def copy(self):
        return EncDecWeights(
            {n: (k.copy(), b.copy()) for n, (k, b) in self.tensors.items()},
            self.channels)

    def astype(self, dtype):
        return EncDecWeights(
            {n: (k.astype(dtype), b.astype(dtype)) for n, (k, b) in self.tensors.items()},
            self.channels)


def encdec_init(channels=(16, 32, 64), seed=0, dtype=np.float64):
    rng = np.random.default_rng(seed) if isinstance(seed, int) else seed
    tensors = {}
    for name, ci, co in _layout(channels):
        lim = np.sqrt(6.0 / (9 * ci + 9 * co))
        tensors[name] = (
            rng.uniform(-lim, lim, (9 * ci, co)).astype(dtype),
            np.zeros(co, dtype=dtype),
        )
    return EncDecWeights(tensors, channels)


# ---------------------------------------------------------------------------
# primitive layers (NHWC)

def _extract(x):
    """im2col for a 3x3 window with zero padding: (B,H,W,C) -> (BHW, 9C)."""
    b, h, w, c = x.shape
    xp = np.zeros((b, h + 2, w + 2, c), dtype=x.dtype)
    xp[:, 1:-1, 1:-1, :] = x
    cols = np.empty((b, h, w, 9, c), dtype=x.dtype)
    for k in range(9):
        dy, dx = divmod(k, 3)
        cols[:, :, :, k, :] = xp[:, dy:dy + h, dx:dx + w, :]
    return cols.reshape(b * h * w, 9 * c)


def _conv(x, kernel, bias):
    b, h, w, _ = x.shape
    out = _extract(x) @ kernel + bias
    return out.reshape(b, h, w, kernel.shape[1])


def _conv_back(x, kernel, dout):
    """Gradients of a 3x3 conv: returns (dx, dkernel, dbias)."""
    b, h, w, ci = x.shape
    co = kernel.shape[1]
    dflat = dout.reshape(-1, co)
    dk = _extract(x).T @ dflat
    db = dflat.sum(axis=0)
    # dx is a full correlation of dout with the flipped, channel-swapped kernel
    kswap = kernel.reshape(3, 3, ci, co)[::-1, ::-1].transpose(0, 1, 3, 2).reshape(9 * co, ci)
    dx = (_extract(dout) @ np.ascontiguousarray(kswap)).reshape(b, h, w, ci)
    return dx, dk, db


def _pool(x):
    b, h, w, c = x.shape
    return x.reshape(b, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4))


def _pool_back(dout):
    return np.repeat(np.repeat(dout, 2, axis=1), 2, axis=2) * np.asarray(0.25, dout.dtype)


def _up(x):
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2)


def _up_back(dout):
    b, h, w, c = dout.shape
    return dout.reshape(b, h // 2, 2, w // 2, 2, c).sum(axis=(2, 4))


# ---------------------------------------------------------------------------
# network

def _forward(weights, x, cache=None):
    def conv(name, v, relu=True):
        out = _conv(v, *weights.tensors[name])
        mask = out > 0 if relu else None
        if relu:
            out *= mask
        if cache is not None:
            cache[name] = (v, mask)
        return out

    e1 = conv("enc1b", conv("enc1a", x))
    e2 = conv("enc2b", conv("enc2a", _pool(e1)))
    m = conv("midb", conv("mida", _pool(e2)))
    u2 = conv("up2", _up(m))
    d2 = conv("dec2", np.concatenate([u2, e2], axis=3))
    u1 = conv("up1", _up(d2))
    d1 = conv("dec1", np.concatenate([u1, e1], axis=3))
    return conv("out", d1, relu=False)


def _backward(weights, cache, dout):
    c1, c2, _ = weights.channels
    grads = {}

    def back(name, d):
        v, mask = cache[name]
        if mask is not None:
            d = d * mask
        dx, dk, db = _conv_back(v, weights.tensors[name][0], d)
        grads[name] = (dk, db)
        return dx

    dcat1 = back("dec1", back("out", dout))
    dd2 = _up_back(back("up1", dcat1[..., :c1]))
    dcat2 = back("dec2", dd2)
    dm = _up_back(back("up2", dcat2[..., :c2]))
    dp2 = back("mida", back("midb", dm))
    de2 = _pool_back(dp2) + dcat2[..., c2:]
    dp1 = back("enc2a", back("enc2b", de2))
    de1 = _pool_back(dp1) + dcat1[..., c1:]
    back("enc1a", back("enc1b", de1))
    return grads


def _check_dims(h, w):
    if h % 4 or w % 4:
        raise ValueError(f"raster dims must be divisible by 4, got {h}x{w}")


def encdec_forward(weights, batch):
    """Forward pass on a (N, H, W) stack; returns a (N, H, W) stack."""
    batch = np.asarray(batch, dtype=weights.dtype)
    if batch.ndim != 3:
        raise ValueError(f"expected (N, H, W) input, got shape {batch.shape}")
    _check_dims(batch.shape[1], batch.shape[2])
    return _forward(weights, batch[:, :, :, None])[:, :, :, 0]


def encdec_infer(weights, raster):
    """Single-raster inference: (H, W) -> (H, W) float64."""
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ValueError(f"expected a 2D raster, got shape {raster.shape}")
    return encdec_forward(weights, raster[None])[0].astype(np.float64)


def encdec_loss_and_grads(weights, batch, targets):
    """Per-pixel MSE and parameter gradients on a raster batch."""
    batch = np.asarray(batch, dtype=weights.dtype)
    targets = np.asarray(targets, dtype=weights.dtype)
    cache = {}
    pred = _forward(weights, batch[:, :, :, None], cache)
    resid = pred - targets[:, :, :, None]
    loss = float(np.mean(resid.astype(np.float64) ** 2))
    dout = (2.0 / resid.size) * resid
    return loss, _backward(weights, cache, dout)


def encdec_train(x, y, cfg=None, channels=(16, 32, 64), validation=None,
                 dtype=np.float32):
    """Train on (N, H, W) raster pairs; returns a TrainResult.

    Rasters in one call must share a shape divisible by 4. Training runs in
    float32 by default; pass dtype=np.float64 for slow exact arithmetic.
    """
    cfg = cfg or TrainConfig(learning_rate=1e-3, batch_size=8)
    x = np.asarray(x, dtype=dtype)
    y = np.asarray(y, dtype=dtype)
    if x.shape != y.shape or x.ndim != 3:
        raise ValueError("expected matching (N, H, W) input/target stacks")
    if len(x) == 0:
        raise ValueError("dataset is empty")
    _check_dims(x.shape[1], x.shape[2])
    rng = np.random.default_rng(cfg.seed)
    weights = encdec_init(channels, rng, dtype)

    if validation is None and cfg.patience is not None:
        tr, va = split_validation(len(x), cfg, rng)
        x_val, y_val = x[va], y[va]
        x, y = x[tr], y[tr]
    elif validation is not None:
        x_val = np.asarray(validation[0], dtype=dtype)
        y_val = np.asarray(validation[1], dtype=dtype)
    else:
        x_val = y_val = None

    vel = {n: (np.zeros_like(k), np.zeros_like(b))
           for n, (k, b) in weights.tensors.items()}

    def do_batch(idx):
        _, grads = encdec_loss_and_grads(weights, x[idx], y[idx])
        for name, (gk, gb) in grads.items():
            k, b = weights.tensors[name]
            vk, vb = vel[name]
            vk = cfg.momentum * vk - cfg.learning_rate * gk.astype(dtype)
            vb = cfg.momentum * vb - cfg.learning_rate * gb.astype(dtype)
            vel[name] = (vk, vb)
            weights.tensors[name] = (k + vk, b + vb)

    def mse(a, b):
        chunks = [float(np.mean((encdec_forward(weights, a[i:i + cfg.batch_size])
                                 - b[i:i + cfg.batch_size]) ** 2))
                  for i in range(0, len(a), cfg.batch_size)]
        return float(np.mean(chunks))

    eval_val = (lambda: mse(x_val, y_val)) if x_val is not None else None
    train_loss, val_loss, epochs_run, history = run_epochs(
        cfg, len(x), do_batch, lambda: mse(x, y), eval_val, rng)
    return TrainResult(weights, train_loss, val_loss, epochs_run, history)
