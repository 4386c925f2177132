"""Shared training configuration and loop helpers.

Both trainers use plain SGD with momentum and mean-squared-error loss. For a
fixed (seed, dataset, config) triple the resulting weights are bit-identical
across runs: shuffling comes from a dedicated generator, batches are visited
in order, and updates are applied sequentially.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import TrainingDivergedError


@dataclass
class TrainConfig:
    learning_rate: float = 1e-2
    momentum: float = 0.9
    batch_size: int = 256
    epochs: int = 200
    seed: int = 0
    # epochs without validation improvement before stopping; None disables
    # early stopping (and the implicit validation split)
    patience: int | None = 20
    val_fraction: float = 0.1

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class TrainResult:
    weights: object
    train_loss: float
    val_loss: float | None
    epochs_run: int
    history: list


def split_validation(n, cfg, rng):
    """Seeded index split used when early stopping needs a held-out set."""
    n_val = max(1, int(round(cfg.val_fraction * n)))
    if n_val >= n:
        raise ValueError("dataset too small for a validation split")
    perm = rng.permutation(n)
    return perm[n_val:], perm[:n_val]


def run_epochs(cfg, n_train, do_batch, eval_train, eval_val, rng):
    """Generic epoch loop: shuffle, step over batches, early-stop on plateau.

    `do_batch(idx)` performs one SGD step on the given sample indices.
    Returns (train_loss, val_loss, epochs_run, history).
    """
    best_val = np.inf
    stale = 0
    history = []
    epochs_run = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        for start in range(0, n_train, cfg.batch_size):
            do_batch(order[start:start + cfg.batch_size])
        epochs_run += 1
        train_loss = eval_train()
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(epoch, cfg.learning_rate)
        val_loss = eval_val() if eval_val is not None else None
        history.append((train_loss, val_loss))
        if cfg.patience is not None and val_loss is not None:
            if val_loss < best_val:
                best_val = val_loss
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    train_loss, val_loss = history[-1]
    return train_loss, val_loss, epochs_run, history
