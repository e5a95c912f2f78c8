import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError
from features.cache import FeatureDataset
from features.models import FeatureBundle
from histfn.functions import context_to_functions
from net.layers import softmax_ce
from net.models import EpochReport, InputSpec, NetworkConfig, TrainConfig, TrainState
from net.network import Network
from net.optim import sgd_step
from utils.classes import Observable, Observer
from utils.enums import FeatureName, Normalization
from utils.functions import format_duration, make_rng
from utils.log import get_logger


@dataclass
class Model:
    """Trained network with its configuration, input layout and loss curve."""

    network: Network
    train_config: TrainConfig
    loss_curve: list[EpochReport] = field(default_factory=list)
    feature_manifest: dict = field(default_factory=dict)

    @property
    def config(self) -> NetworkConfig:
        return self.network.config

    @property
    def inputs(self) -> list[InputSpec]:
        return self.network.inputs


class LossCurve(Observer):
    """Collects epoch reports and writes them as `epoch,loss,lr` CSV."""

    def __init__(self):
        self.reports: list[EpochReport] = []

    def notify(self, notification: EpochReport) -> None:
        self.reports.append(notification)

    def write(self, path: Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "loss", "lr"])
            for report in self.reports:
                writer.writerow([report.epoch, repr(report.loss), repr(report.lr)])


class ProgressLogger(Observer):
    _logger = get_logger("Training")

    def __init__(self, epochs: int):
        self.epochs = epochs
        self.started = time.monotonic()

    def notify(self, notification: EpochReport) -> None:
        self._logger.info(
            "Epoch %d/%d: loss %.6f, lr %g, elapsed %s",
            notification.epoch, self.epochs, notification.loss, notification.lr,
            format_duration(time.monotonic() - self.started),
        )


def build_inputs(dataset: FeatureDataset, features: list, radius_learning: bool) -> list[InputSpec]:
    """
    Network inputs for the chosen features of a dataset, in canonical order.

    Args:
        dataset (FeatureDataset): Extracted features.
        features (list): Feature names to feed the network.
        radius_learning (bool): Feed context features as histogram functions to
            radius learning layers instead of fixed-radius histograms.

    Raises:
        ConfigurationError: If a feature was not extracted.

    Returns:
        list[InputSpec]: One spec per feature.
    """
    specs = []
    for name in FeatureName.ordered(features):
        if name not in dataset.dims:
            raise ConfigurationError(f"feature {name.value} is not in the feature cache")
        if name.is_context and radius_learning:
            start, stop = dataset.segments[name]
            specs.append(InputSpec(name.value, stop - start, "radius", dataset.key_counts[name]))
        else:
            specs.append(InputSpec(name.value, dataset.dims[name]))
    return specs


def gather_inputs(dataset: FeatureDataset, specs: list[InputSpec], indices: np.ndarray) -> dict:
    """Network inputs of the given records."""
    inputs = {}
    for spec in specs:
        name = FeatureName(spec.name)
        inputs[spec.name] = dataset.functions(name, indices) if spec.is_radius else dataset.matrix(name, indices)
    return inputs


def check_dataset(dataset: FeatureDataset, specs: list[InputSpec], class_count: int, knots: np.ndarray | None) -> None:
    """Raises DimensionMismatchError when the dataset cannot feed a network with these inputs."""
    if dataset.class_count != class_count:
        raise DimensionMismatchError(f"dataset has {dataset.class_count} classes, network {class_count}")
    for spec in specs:
        name = FeatureName(spec.name)
        if name not in dataset.dims:
            raise DimensionMismatchError(f"dataset lacks feature {spec.name}")
        if spec.is_radius:
            start, stop = dataset.segments[name]
            if stop - start != spec.dim:
                raise DimensionMismatchError(f"{spec.name}: {stop - start} histogram functions, network expects {spec.dim}")
            if knots is None or dataset.knots is None or not np.array_equal(dataset.knots, knots):
                raise DimensionMismatchError(f"{spec.name}: radii of the dataset differ from the network's")
        elif dataset.dims[name] != spec.dim:
            raise DimensionMismatchError(f"{spec.name}: dataset dim {dataset.dims[name]}, network expects {spec.dim}")


class Trainer(Observable):
    """Minibatch momentum SGD over a FeatureDataset; publishes an EpochReport per epoch."""

    _logger = get_logger("Trainer")

    def __init__(self, net_config: NetworkConfig, train_config: TrainConfig):
        super().__init__()
        self.net_config = net_config
        self.train_config = train_config

    def train(self, dataset: FeatureDataset, features: list) -> Model:
        """
        Trains a network on the given features of a dataset.

        Args:
            dataset (FeatureDataset): Labeled training set.
            features (list): Feature names to use.

        Raises:
            EmptyInputError: If the dataset is empty.
            DimensionMismatchError: If dataset and network dims disagree (before any step).

        Returns:
            Model: Trained model with its loss curve.
        """
        if not len(dataset):
            raise EmptyInputError("training set is empty")
        dataset.check_labels()
        config = self.train_config
        specs = build_inputs(dataset, features, self.net_config.rl_replicas > 0)
        network = Network(specs, self.net_config, dataset.knots, config.seed)
        check_dataset(dataset, specs, self.net_config.class_count, network.knots)
        self._logger.info("Training %s on %d records: %s", self.net_config.label, len(dataset),
                          [f"{s.variant}:{s.name}({s.in_dim}->{s.out_dim})" for s in network.describe()])

        bounds = None
        if network.knots is not None:
            bounds = (float(network.knots[0]), float(network.knots[-1]))
        state = TrainState(params=network.parameters(), kinds=network.parameter_kinds(), rho_bounds=bounds)
        shuffle_rng = make_rng(config.seed, "shuffle")
        model = Model(network=network, train_config=config, feature_manifest=dataset.manifest())
        n = len(dataset)

        for epoch in range(config.epochs):
            state.lr = config.learning_rate(epoch)
            order = shuffle_rng.permutation(n)
            total = 0.0
            for start in range(0, n, config.batch_size):
                idx = order[start:start + config.batch_size]
                logits = network.forward(gather_inputs(dataset, specs, idx), train=True)
                loss, grad = softmax_ce(logits, dataset.labels[idx])
                network.backward(grad)
                sgd_step(state, network.gradients(), config)
                total += loss * idx.size
            state.epoch = epoch + 1
            state.loss = total / n
            if not np.isfinite(state.loss):
                raise ConfigurationError(f"training diverged at epoch {state.epoch} (loss {state.loss})")
            report = EpochReport(epoch=state.epoch, loss=state.loss, lr=state.lr)
            model.loss_curve.append(report)
            self._notify_observers(report)
        return model


def train(dataset: FeatureDataset, features: list, net_config: NetworkConfig, train_config: TrainConfig,
          observers: list[Observer] = ()) -> Model:
    """Trains a model; see Trainer.train."""
    trainer = Trainer(net_config, train_config)
    for observer in observers:
        trainer.subscribe(observer)
    return trainer.train(dataset, features)


def predict(model: Model, inputs: dict) -> np.ndarray:
    """Class probabilities of a batch of inputs, dropout disabled."""
    return model.network.predict_proba(inputs)


def predict_dataset(model: Model, dataset: FeatureDataset, batch_size: int = 1024) -> np.ndarray:
    """Class probabilities of every record of a dataset, shape (n, classes)."""
    check_dataset(dataset, model.inputs, model.config.class_count, model.network.knots)
    n = len(dataset)
    if not n:
        return np.zeros((0, model.config.class_count))
    chunks = []
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        chunks.append(predict(model, gather_inputs(dataset, model.inputs, idx)))
    return np.vstack(chunks)


def predict_bundle(model: Model, bundle: FeatureBundle) -> np.ndarray:
    """
    Class probability vector of one record.

    Raises:
        DimensionMismatchError: If the bundle misses a feature or has a different dim.
    """
    inputs = {}
    for spec in model.inputs:
        name = FeatureName(spec.name)
        if name not in bundle.vectors:
            raise DimensionMismatchError(f"bundle {bundle.record_id} lacks feature {spec.name}")
        vector = bundle.vectors[name]
        if spec.is_radius:
            inputs[spec.name] = context_to_functions(vector, model.network.knots.size)[None]
        else:
            inputs[spec.name] = vector[None]
    return predict(model, inputs)[0]


def learned_radii(model: Model) -> list[dict]:
    """
    Learned radii of every radius learning layer, one row per (feature, key,
    normalization, replica), replicas sorted by radius within a function.
    """
    rows = []
    for spec in model.inputs:
        if not spec.is_radius:
            continue
        rho = model.network.radius_layers()[spec.name].radius.rho
        for fn in range(rho.shape[0]):
            block, key = divmod(fn, spec.key_count)
            for replica, radius in enumerate(np.sort(rho[fn])):
                rows.append({
                    "feature": spec.name,
                    "key": key,
                    "normalization": Normalization(block).name.lower(),
                    "replica": replica,
                    "radius_m": float(radius),
                })
    rows.sort(key=lambda row: (row["feature"], row["key"], row["normalization"], row["replica"]))
    return rows
