from net.checkpoint import load_checkpoint, save_checkpoint
from net.layers import (
    Dropout,
    FullyConnected,
    RadiusLearning,
    ReLU,
    concat_backward,
    concat_forward,
    dropout_mask,
    fc_backward,
    fc_forward,
    radius_backward,
    radius_forward,
    relu_backward,
    relu_forward,
    softmax,
    softmax_ce,
)
from net.models import (
    EpochReport,
    InputSpec,
    LayerSpec,
    NetworkConfig,
    ParamKind,
    RadiusParams,
    TrainConfig,
    TrainState,
)
from net.network import Network
from net.optim import sgd_step
from net.trainer import (
    LossCurve,
    Model,
    ProgressLogger,
    Trainer,
    build_inputs,
    learned_radii,
    predict,
    predict_bundle,
    predict_dataset,
    train,
)

__all__ = [
    "Dropout",
    "EpochReport",
    "FullyConnected",
    "InputSpec",
    "LayerSpec",
    "LossCurve",
    "Model",
    "Network",
    "NetworkConfig",
    "ParamKind",
    "ProgressLogger",
    "RadiusLearning",
    "RadiusParams",
    "ReLU",
    "TrainConfig",
    "TrainState",
    "Trainer",
    "build_inputs",
    "concat_backward",
    "concat_forward",
    "dropout_mask",
    "fc_backward",
    "fc_forward",
    "learned_radii",
    "load_checkpoint",
    "predict",
    "predict_bundle",
    "predict_dataset",
    "radius_backward",
    "radius_forward",
    "relu_backward",
    "relu_forward",
    "save_checkpoint",
    "sgd_step",
    "softmax",
    "softmax_ce",
]
