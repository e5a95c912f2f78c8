import numpy as np

from exceptions import DimensionMismatchError
from net.models import ParamKind, TrainConfig, TrainState


def sgd_step(state: TrainState, grads: dict[str, np.ndarray], config: TrainConfig) -> TrainState:
    """
    One momentum SGD update at `state.lr`, in place:
    v = momentum * v - lr * (grad + weight_decay * w); w = w + v.

    Weight decay applies to weights only. Radii use lr * radius_lr_mult and are
    clamped to `state.rho_bounds` afterwards. Parameters without a gradient are skipped.

    Args:
        state (TrainState): Parameters, buffers and current learning rate.
        grads (dict[str, np.ndarray]): Gradients keyed like state.params.
        config (TrainConfig): Momentum, weight decay and radius multiplier.

    Raises:
        DimensionMismatchError: If a gradient does not match its parameter.

    Returns:
        TrainState: The same state, updated.
    """
    for name, grad in grads.items():
        weights = state.params[name]
        if grad.shape != weights.shape:
            raise DimensionMismatchError(f"gradient of {name} has shape {grad.shape}, parameter {weights.shape}")
        kind = state.kinds[name]
        velocity = state.velocity[name]
        lr = state.lr * config.radius_lr_mult if kind == ParamKind.RADIUS else state.lr
        step = grad + config.weight_decay * weights if kind == ParamKind.WEIGHT else grad
        velocity *= config.momentum
        velocity -= lr * step
        weights += velocity
        if kind == ParamKind.RADIUS and state.rho_bounds is not None:
            np.clip(weights, *state.rho_bounds, out=weights)
    return state
