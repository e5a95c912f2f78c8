import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from dataclasses_json import dataclass_json

from constants import (
    BATCH_SIZE,
    DROPOUT,
    EPOCHS,
    LEARNING_RATE,
    LR_GAMMA,
    LR_STEP_EPOCHS,
    MOMENTUM,
    RADIUS_LR_MULT,
    WEIGHT_DECAY,
)
from exceptions import ConfigurationError


class ParamKind(Enum):
    """Optimizer treatment of a parameter tensor."""

    WEIGHT = "weight"
    BIAS = "bias"
    RADIUS = "radius"


@dataclass_json
@dataclass(frozen=True)
class LayerSpec:
    """Description of one layer: FullyConnected, ReLU, Dropout, Concat, RadiusLearning or SoftmaxCE."""

    variant: str
    name: str
    in_dim: int
    out_dim: int
    params: dict = field(default_factory=dict)


@dataclass_json
@dataclass(frozen=True)
class InputSpec:
    """
    One network input. Dense inputs carry a (batch, dim) matrix; radius inputs carry
    histogram function values (batch, dim, len(knots)) and dim is the function count.
    """

    name: str
    dim: int
    kind: str = "dense"
    key_count: int = 0

    @property
    def is_radius(self) -> bool:
        return self.kind == "radius"


@dataclass_json
@dataclass(frozen=True)
class NetworkConfig:
    """
    Architecture: `precat`/`postcat` are the widths of the fully connected layers before
    (per location feature) and after the concatenation layer, 0 meaning no layer.
    `rl_replicas` is the number K of radius learning replicas, 0 meaning fixed histograms.
    """

    class_count: int
    precat: int = 0
    postcat: int = 0
    rl_replicas: int = 0
    dropout: float = DROPOUT

    def __post_init__(self):
        if self.class_count < 2:
            raise ConfigurationError(f"need at least 2 classes, got {self.class_count}")
        if self.precat < 0 or self.postcat < 0 or self.rl_replicas < 0:
            raise ConfigurationError("layer widths and replica count must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigurationError(f"dropout must be in [0, 1), got {self.dropout}")

    @property
    def label(self) -> str:
        """Table notation, e.g. '256/-' or '256/4096 RL10'."""
        name = f"{self.precat or '-'}/{self.postcat or '-'}"
        return f"{name} RL{self.rl_replicas}" if self.rl_replicas else name


@dataclass_json
@dataclass(frozen=True)
class TrainConfig:
    """SGD recipe: momentum, weight decay, step learning-rate schedule."""

    seed: int
    lr: float = LEARNING_RATE
    momentum: float = MOMENTUM
    weight_decay: float = WEIGHT_DECAY
    epochs: int = EPOCHS
    lr_step: int = LR_STEP_EPOCHS
    lr_gamma: float = LR_GAMMA
    batch_size: int = BATCH_SIZE
    radius_lr_mult: float = RADIUS_LR_MULT

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.lr_step < 1:
            raise ConfigurationError("epochs, batch size and lr step must be >= 1")
        if self.lr <= 0 or self.momentum < 0 or self.weight_decay < 0 or self.lr_gamma <= 0 or self.radius_lr_mult <= 0:
            raise ConfigurationError("learning rates must be > 0, momentum and weight decay >= 0")

    def learning_rate(self, epoch: int) -> float:
        """Learning rate of a 0-based epoch: lr * gamma ** (epoch // lr_step)."""
        return self.lr * self.lr_gamma ** (epoch // self.lr_step)


@dataclass
class RadiusParams:
    """Learnable pooling radii rho[f, k] of F histogram functions and K replicas, meters."""

    rho: np.ndarray
    r_min: float
    r_max: float

    def clamp(self) -> None:
        np.clip(self.rho, self.r_min, self.r_max, out=self.rho)

    @property
    def fn_count(self) -> int:
        return self.rho.shape[0]

    @property
    def replicas(self) -> int:
        return self.rho.shape[1]


@dataclass
class TrainState:
    """Parameters (shared with the network layers), momentum buffers and progress."""

    params: dict[str, np.ndarray]
    kinds: dict[str, ParamKind]
    velocity: dict[str, np.ndarray] = field(default_factory=dict)
    rho_bounds: tuple[float, float] | None = None
    lr: float = 0.0
    epoch: int = 0
    loss: float = math.nan

    def __post_init__(self):
        for name, value in self.params.items():
            self.velocity.setdefault(name, np.zeros_like(value))


@dataclass_json
@dataclass(frozen=True)
class EpochReport:
    """Progress event published after every epoch."""

    epoch: int
    loss: float
    lr: float
