from .common import TrainConfig, TrainResult
from .mlp import MlpWeights, mlp_forward, mlp_init, mlp_loss_and_grads, mlp_train
from .encdec import (
    EncDecWeights,
    encdec_forward,
    encdec_infer,
    encdec_init,
    encdec_loss_and_grads,
    encdec_train,
)
from .io import weights_load, weights_save

__all__ = [
    "TrainConfig",
    "TrainResult",
    "MlpWeights",
    "mlp_init",
    "mlp_forward",
    "mlp_loss_and_grads",
    "mlp_train",
    "EncDecWeights",
    "encdec_init",
    "encdec_forward",
    "encdec_infer",
    "encdec_loss_and_grads",
    "encdec_train",
    "weights_save",
    "weights_load",
]
