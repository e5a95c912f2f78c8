import numpy as np

from constants import RADIUS_INIT_JITTER
from exceptions import ConfigurationError, DimensionMismatchError
from net.layers import (
    Dropout,
    FullyConnected,
    Layer,
    RadiusLearning,
    ReLU,
    concat_backward,
    concat_forward,
    softmax,
)
from net.models import InputSpec, LayerSpec, NetworkConfig, ParamKind
from utils.enums import FeatureName
from utils.functions import make_rng


class Network:
    """
    Concatenation network.

    Every input has its own branch. Location features get an optional pre-cat
    FullyConnected + ReLU + Dropout block; context features with radius learning start
    with a RadiusLearning layer. The image embedding enters the concatenation as is.
    After the concatenation come an optional post-cat block and the final classifier,
    whose logits feed the softmax.
    """

    def __init__(self, inputs: list[InputSpec], config: NetworkConfig, knots: np.ndarray | None = None, seed: int = 0):
        if not inputs:
            raise ConfigurationError("network needs at least one input")
        self.inputs = list(inputs)
        self.config = config
        self.knots = None if knots is None else np.asarray(knots, dtype=np.float64)
        init_rng = make_rng(seed, "init")
        jitter_rng = make_rng(seed, "jitter")
        self._dropout_rng = make_rng(seed, "dropout")

        self.branches: dict[str, list[Layer]] = {}
        part_dims = []
        for spec in self.inputs:
            layers, dim = self._branch(spec, init_rng, jitter_rng)
            self.branches[spec.name] = layers
            part_dims.append(dim)
        self.part_dims = part_dims

        self.head: list[Layer] = []
        width = sum(part_dims)
        if config.postcat:
            self.head += self._block("postcat", width, config.postcat, init_rng, propagate=True)
            width = config.postcat
        self.head.append(FullyConnected("output.fc", width, config.class_count, init_rng))

    def _block(self, prefix: str, in_dim: int, out_dim: int, rng, propagate: bool) -> list[Layer]:
        return [
            FullyConnected(f"{prefix}.fc", in_dim, out_dim, rng, propagate=propagate),
            ReLU(f"{prefix}.relu", out_dim),
            Dropout(f"{prefix}.dropout", out_dim, self.config.dropout, self._dropout_rng),
        ]

    def _branch(self, spec: InputSpec, init_rng, jitter_rng) -> tuple[list[Layer], int]:
        layers: list[Layer] = []
        dim = spec.dim
        if spec.is_radius:
            if self.knots is None or not self.config.rl_replicas:
                raise ConfigurationError(f"{spec.name}: radius learning needs knots and rl_replicas >= 1")
            layers.append(RadiusLearning(
                f"{spec.name}.radius", spec.dim, self.config.rl_replicas, self.knots, jitter_rng, RADIUS_INIT_JITTER
            ))
            dim = layers[-1].out_dim
        if self.config.precat and spec.name != FeatureName.IMAGE.value:
            layers += self._block(f"{spec.name}.precat", dim, self.config.precat, init_rng, propagate=bool(layers))
            dim = self.config.precat
        return layers, dim

    @property
    def layers(self) -> list[Layer]:
        """All layers in declared order: branches in input order, then the head."""
        return [layer for branch in self.branches.values() for layer in branch] + self.head

    def parameters(self) -> dict[str, np.ndarray]:
        """Parameter arrays keyed `<layer>.<param>`, in declared order. The arrays are live."""
        return {f"{layer.name}.{key}": value for layer in self.layers for key, value in layer.params.items()}

    def parameter_kinds(self) -> dict[str, ParamKind]:
        return {f"{layer.name}.{key}": kind for layer in self.layers for key, kind in layer.kinds.items()}

    def gradients(self) -> dict[str, np.ndarray]:
        """Gradients of the last backward pass, same keys as parameters."""
        return {f"{layer.name}.{key}": value for layer in self.layers for key, value in layer.grads.items()}

    def radius_layers(self) -> dict[str, RadiusLearning]:
        return {
            spec.name: branch[0]
            for spec, branch in zip(self.inputs, self.branches.values())
            if branch and isinstance(branch[0], RadiusLearning)
        }

    def describe(self) -> list[LayerSpec]:
        return [layer.spec() for layer in self.layers]

    def _check_inputs(self, inputs: dict) -> int:
        batch = None
        for spec in self.inputs:
            if spec.name not in inputs:
                raise DimensionMismatchError(f"missing input {spec.name}")
            x = inputs[spec.name]
            expected = 3 if spec.is_radius else 2
            if x.ndim != expected or x.shape[1] != spec.dim:
                raise DimensionMismatchError(f"input {spec.name} has shape {x.shape}, expected dim {spec.dim}")
            if spec.is_radius and self.knots is not None and x.shape[2] != self.knots.size:
                raise DimensionMismatchError(f"input {spec.name} has {x.shape[2]} radii, expected {self.knots.size}")
            if batch is not None and x.shape[0] != batch:
                raise DimensionMismatchError("inputs disagree on the batch size")
            batch = x.shape[0]
        return batch

    def forward(self, inputs: dict, train: bool = False) -> np.ndarray:
        """
        Forward pass of a batch.

        Args:
            inputs (dict): Input name -> (batch, dim) matrix, or (batch, F, R) function
                values for radius inputs.
            train (bool, optional): Enables dropout. Defaults to False.

        Returns:
            np.ndarray: Logits, shape (batch, classes).
        """
        self._check_inputs(inputs)
        parts = []
        for spec in self.inputs:
            x = inputs[spec.name]
            for layer in self.branches[spec.name]:
                x = layer.forward(x, train)
            parts.append(x)
        x = concat_forward(parts, self.part_dims)
        for layer in self.head:
            x = layer.forward(x, train)
        return x

    def backward(self, grad_logits: np.ndarray) -> None:
        """Backpropagates the loss gradient, filling every layer's grads."""
        grad = grad_logits
        for layer in reversed(self.head):
            grad = layer.backward(grad)
        for branch, part_grad in zip(self.branches.values(), concat_backward(grad, self.part_dims)):
            for layer in reversed(branch):
                part_grad = layer.backward(part_grad)

    def predict_proba(self, inputs: dict) -> np.ndarray:
        """Class probabilities with dropout disabled, shape (batch, classes)."""
        return softmax(self.forward(inputs, train=False))
