"""Small fully-connected network: tanh hidden layers, linear output.

The default shape maps 5 inputs (color channels plus normalized pixel
position) through three hidden layers of 32 units to 2 outputs (the two
surface-slope components). Weights are float64; forward and backward passes
are plain matmuls so results are reproducible.
"""

import numpy as np

from .common import TrainConfig, TrainResult, run_epochs, split_validation


class MlpWeights:
    """Per-layer (weight matrix, bias vector) pairs."""

    def __init__(self, layers):
        self.layers = [(np.asarray(w, dtype=np.float64), np.asarray(b, dtype=np.float64))
                       for w, b in layers]
        widths = [self.layers[0][0].shape[0]]
        for w, b in self.layers:
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError("malformed layer tensors")
            if w.shape[0] != widths[-1]:
                raise ValueError(f"layer dims do not chain: {w.shape[0]} after {widths[-1]}")
            widths.append(w.shape[1])
        for w, b in self.layers:
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError("weights contain non-finite values")
        self.widths = tuple(widths)

    @property
    def n_inputs(self):
        return self.widths[0]

    @property
    def n_outputs(self):
        return self.widths[-1]

    def copy(self):
        return MlpWeights([(w.copy(), b.copy()) for w, b in self.layers])


def mlp_init(widths, seed=0):
    """Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases."""
    rng = np.random.default_rng(seed) if isinstance(seed, int) else seed
    layers = []
    for a, b in zip(widths[:-1], widths[1:]):
        lim = np.sqrt(6.0 / (a + b))
        layers.append((rng.uniform(-lim, lim, (a, b)), np.zeros(b)))
    return MlpWeights(layers)


def _forward_cached(weights, x):
    acts = [x]
    h = x
    last = len(weights.layers) - 1
    for k, (w, b) in enumerate(weights.layers):
        h = h @ w + b
        if k < last:
            h = np.tanh(h)
        acts.append(h)
    return acts


def mlp_forward(weights, x):
    """Batch forward pass: (N, n_in) -> (N, n_out)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != weights.n_inputs:
        raise ValueError(
            f"expected input of shape (N, {weights.n_inputs}), got {x.shape}")
    return _forward_cached(weights, x)[-1]


def mlp_loss_and_grads(weights, x, y):
    """Mean-squared-error loss and its gradients for every parameter.

    Returns (loss, grads) with grads shaped like weights.layers.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    acts = _forward_cached(weights, x)
    resid = acts[-1] - y
    loss = float(np.mean(resid ** 2))
    delta = 2.0 * resid / resid.size
    grads = [None] * len(weights.layers)
    for k in range(len(weights.layers) - 1, -1, -1):
        grads[k] = (acts[k].T @ delta, delta.sum(axis=0))
        if k > 0:
            # tanh'(z) expressed through the cached activation
            delta = (delta @ weights.layers[k][0].T) * (1.0 - acts[k] ** 2)
    return loss, grads


def _mse(weights, x, y):
    return float(np.mean((_forward_cached(weights, x)[-1] - y) ** 2))


def mlp_train(widths, x, y, cfg=None, validation=None):
    """Train from scratch on (x, y); returns a TrainResult.

    `widths` may also be an MlpWeights instance to continue training.
    `validation` is an optional (x_val, y_val) pair; when omitted and early
    stopping is enabled, a seeded fraction of the data is held out.
    """
    cfg = cfg or TrainConfig()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) == 0:
        raise ValueError("dataset is empty")
    if len(x) != len(y):
        raise ValueError("inputs and targets differ in length")
    rng = np.random.default_rng(cfg.seed)
    weights = widths.copy() if isinstance(widths, MlpWeights) else mlp_init(widths, rng)
    if x.shape[1] != weights.n_inputs or y.shape[1] != weights.n_outputs:
        raise ValueError("dataset dims do not match the network")

    if validation is None and cfg.patience is not None:
        tr, va = split_validation(len(x), cfg, rng)
        x_val, y_val = x[va], y[va]
        x, y = x[tr], y[tr]
    elif validation is not None:
        x_val = np.asarray(validation[0], dtype=np.float64)
        y_val = np.asarray(validation[1], dtype=np.float64)
    else:
        x_val = y_val = None

    vel = [(np.zeros_like(w), np.zeros_like(b)) for w, b in weights.layers]

    def do_batch(idx):
        _, grads = mlp_loss_and_grads(weights, x[idx], y[idx])
        for k, ((w, b), (gw, gb), (vw, vb)) in enumerate(zip(weights.layers, grads, vel)):
            vw = cfg.momentum * vw - cfg.learning_rate * gw
            vb = cfg.momentum * vb - cfg.learning_rate * gb
            vel[k] = (vw, vb)
            weights.layers[k] = (w + vw, b + vb)

    eval_val = (lambda: _mse(weights, x_val, y_val)) if x_val is not None else None
    train_loss, val_loss, epochs_run, history = run_epochs(
        cfg, len(x), do_batch, lambda: _mse(weights, x, y), eval_val, rng)
    return TrainResult(weights, train_loss, val_loss, epochs_run, history)
