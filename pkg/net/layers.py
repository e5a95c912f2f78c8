from abc import ABC, abstractmethod

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

from exceptions import ConfigurationError, DimensionMismatchError, KeyOutOfRangeError
from histfn.functions import bank_deriv, bank_eval
from net.models import LayerSpec, ParamKind, RadiusParams


def fc_forward(W: np.ndarray, b: np.ndarray, x) -> np.ndarray:
    """
    Affine map of a batch, y = x W^T + b.

    Args:
        W (np.ndarray): Weights, shape (out, in).
        b (np.ndarray): Biases, shape (out,).
        x: Inputs, shape (batch, in); ndarray or CSR matrix.

    Raises:
        DimensionMismatchError: If the shapes do not line up.

    Returns:
        np.ndarray: Outputs, shape (batch, out).
    """
    if x.ndim != 2 or x.shape[1] != W.shape[1] or b.shape != (W.shape[0],):
        raise DimensionMismatchError(f"fully connected layer {W.shape} cannot take input {x.shape}")
    return np.asarray(x @ W.T) + b


def fc_backward(W: np.ndarray, x, grad_y: np.ndarray, with_input: bool = True):
    """
    Gradients of a fully connected layer.

    Args:
        W (np.ndarray): Weights, shape (out, in).
        x: Forward inputs, shape (batch, in); ndarray or CSR matrix.
        grad_y (np.ndarray): Upstream gradient, shape (batch, out).
        with_input (bool, optional): Also compute grad_x. Defaults to True.

    Returns:
        tuple: (grad_W, grad_b, grad_x), grad_x is None when with_input is False.
    """
    if grad_y.shape != (x.shape[0], W.shape[0]):
        raise DimensionMismatchError(f"gradient {grad_y.shape} does not match layer output ({x.shape[0]}, {W.shape[0]})")
    grad_W = np.asarray((x.T @ grad_y).T)
    grad_b = grad_y.sum(axis=0)
    grad_x = grad_y @ W if with_input else None
    return grad_W, grad_b, grad_x


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(x: np.ndarray, grad_y: np.ndarray) -> np.ndarray:
    return grad_y * (x > 0)


def dropout_mask(shape: tuple, p: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted dropout mask: 0 with probability p, 1/(1-p) otherwise."""
    if not 0.0 <= p < 1.0:
        raise ConfigurationError(f"dropout must be in [0, 1), got {p}")
    if p == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1.0 - p)


def concat_forward(parts: list[np.ndarray], part_dims: list[int]) -> np.ndarray:
    """Concatenates per-feature batches along the feature axis in the declared order."""
    if len(parts) != len(part_dims):
        raise DimensionMismatchError(f"expected {len(part_dims)} parts, got {len(parts)}")
    dense = []
    for part, dim in zip(parts, part_dims):
        if part.ndim != 2 or part.shape[1] != dim:
            raise DimensionMismatchError(f"part of shape {part.shape} declared with dim {dim}")
        dense.append(part.toarray() if sparse.issparse(part) else part)
    return np.concatenate(dense, axis=1)


def concat_backward(grad: np.ndarray, part_dims: list[int]) -> list[np.ndarray]:
    """Splits the gradient of a concatenation at the forward offsets."""
    if grad.shape[1] != sum(part_dims):
        raise DimensionMismatchError(f"gradient width {grad.shape[1]} != {sum(part_dims)}")
    return np.split(grad, np.cumsum(part_dims)[:-1], axis=1)


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))


def softmax_ce(logits: np.ndarray, labels) -> tuple[float, np.ndarray]:
    """
    Mean softmax cross-entropy of a batch.

    Args:
        logits (np.ndarray): Shape (batch, classes), or (classes,) for one sample.
        labels: Class ids, shape (batch,), or one int.

    Raises:
        KeyOutOfRangeError: If a label is outside [0, classes).

    Returns:
        tuple[float, np.ndarray]: Loss and its gradient w.r.t. the logits,
            (softmax - one_hot) / batch.
    """
    single = logits.ndim == 1
    logits = np.atleast_2d(logits)
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if labels.shape[0] != logits.shape[0]:
        raise DimensionMismatchError(f"{labels.shape[0]} labels for {logits.shape[0]} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise KeyOutOfRangeError(f"label outside [0, {logits.shape[1]})")
    rows = np.arange(logits.shape[0])
    log_probs = logits - logsumexp(logits, axis=1, keepdims=True)
    loss = float(-log_probs[rows, labels].mean())
    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    grad /= logits.shape[0]
    return loss, grad[0] if single else grad


def radius_forward(knots: np.ndarray, values: np.ndarray, params: RadiusParams) -> np.ndarray:
    """
    Evaluates every histogram function at each of its K learned radii.

    Args:
        knots (np.ndarray): Radii the functions are sampled at, shape (R,).
        values (np.ndarray): Function values, shape (batch, F, R).
        params (RadiusParams): Radii rho, shape (F, K).

    Returns:
        np.ndarray: Shape (batch, F * K); column f * K + k holds H_f(rho[f, k]).
    """
    out = bank_eval(knots, values, params.rho)
    return out.reshape(out.shape[0], -1)


def radius_backward(knots: np.ndarray, values: np.ndarray, params: RadiusParams, grad_out: np.ndarray) -> np.ndarray:
    """
    Gradient of the error w.r.t. the radii: upstream gradient times the slope of the
    histogram function at rho, summed over the batch. The functions get no gradient.

    Returns:
        np.ndarray: grad_rho, shape (F, K).
    """
    batch = values.shape[0]
    if grad_out.shape != (batch, params.rho.size):
        raise DimensionMismatchError(f"gradient {grad_out.shape} does not match ({batch}, {params.rho.size})")
    deriv = bank_deriv(knots, values, params.rho)
    return (grad_out.reshape(deriv.shape) * deriv).sum(axis=0)


class Layer(ABC):
    """Layer with cached forward input, named parameters and their gradients."""

    variant = "Layer"

    def __init__(self, name: str, in_dim: int, out_dim: int):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.kinds: dict[str, ParamKind] = {}

    @abstractmethod
    def forward(self, x, train: bool = False):
        ...

    @abstractmethod
    def backward(self, grad):
        ...

    def spec(self) -> LayerSpec:
        return LayerSpec(variant=self.variant, name=self.name, in_dim=self.in_dim, out_dim=self.out_dim)


class FullyConnected(Layer):
    """
    Fully connected layer. Weights start uniform in +-sqrt(6 / (fan_in + fan_out)),
    biases at 0. With `propagate=False` the layer sits on raw input data and skips grad_x.
    """

    variant = "FullyConnected"

    def __init__(self, name: str, in_dim: int, out_dim: int, rng: np.random.Generator, propagate: bool = True):
        super().__init__(name, in_dim, out_dim)
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        self.params = {"W": rng.uniform(-limit, limit, size=(out_dim, in_dim)), "b": np.zeros(out_dim)}
        self.kinds = {"W": ParamKind.WEIGHT, "b": ParamKind.BIAS}
        self.propagate = propagate
        self._x = None

    def forward(self, x, train: bool = False):
        self._x = x
        return fc_forward(self.params["W"], self.params["b"], x)

    def backward(self, grad):
        grad_W, grad_b, grad_x = fc_backward(self.params["W"], self._x, grad, self.propagate)
        self.grads = {"W": grad_W, "b": grad_b}
        return grad_x


class ReLU(Layer):
    variant = "ReLU"

    def __init__(self, name: str, dim: int):
        super().__init__(name, dim, dim)
        self._x = None

    def forward(self, x, train: bool = False):
        self._x = x
        return relu_forward(x)

    def backward(self, grad):
        return relu_backward(self._x, grad)


class Dropout(Layer):
    """Inverted dropout; identity when not training."""

    variant = "Dropout"

    def __init__(self, name: str, dim: int, p: float, rng: np.random.Generator):
        super().__init__(name, dim, dim)
        self.p = p
        self.rng = rng
        self._mask = None

    def forward(self, x, train: bool = False):
        if not train or self.p == 0.0:
            self._mask = None
            return x
        self._mask = dropout_mask(x.shape, self.p, self.rng)
        return x * self._mask

    def backward(self, grad):
        return grad if self._mask is None else grad * self._mask

    def spec(self) -> LayerSpec:
        return LayerSpec(self.variant, self.name, self.in_dim, self.out_dim, {"p": self.p})


class RadiusLearning(Layer):
    """
    Samples F histogram functions at K learnable radii each. Input is the function
    values (batch, F, R) at `knots`; output has F * K columns.
    """

    variant = "RadiusLearning"

    def __init__(self, name: str, fn_count: int, replicas: int, knots: np.ndarray, rng: np.random.Generator, jitter: float):
        super().__init__(name, fn_count, fn_count * replicas)
        if replicas < 1:
            raise ConfigurationError("radius learning needs at least one replica")
        self.knots = np.asarray(knots, dtype=np.float64)
        r_min, r_max = float(self.knots[0]), float(self.knots[-1])
        spacing = (r_max - r_min) / replicas
        rho = r_min + (np.arange(replicas) + 0.5) * spacing
        rho = rho + rng.uniform(-jitter, jitter, size=(fn_count, replicas)) * spacing
        self.radius = RadiusParams(rho=rho, r_min=r_min, r_max=r_max)
        self.radius.clamp()
        self.params = {"rho": self.radius.rho}
        self.kinds = {"rho": ParamKind.RADIUS}
        self._values = None

    @property
    def replicas(self) -> int:
        return self.radius.replicas

    def forward(self, x, train: bool = False):
        self._values = x
        return radius_forward(self.knots, x, self.radius)

    def backward(self, grad):
        self.grads = {"rho": radius_backward(self.knots, self._values, self.radius, grad)}
        return None

    def spec(self) -> LayerSpec:
        return LayerSpec(self.variant, self.name, self.in_dim, self.out_dim, {"replicas": self.replicas})
