from pathlib import Path

import numpy as np

from exceptions import CacheFormatError, ConfigurationError
from net.models import EpochReport, InputSpec, NetworkConfig, TrainConfig
from net.network import Network
from net.trainer import Model
from utils.storage import read_arrays, write_arrays

CHECKPOINT_MAGIC = b"GEOCTXCK"
CHECKPOINT_VERSION = 1


def save_checkpoint(model: Model, path: Path) -> None:
    """
    Writes a model: header with the network and training config echo, the input
    layout, the layer list and the loss curve, then the parameters in declared layer order.
    """
    network = model.network
    params = network.parameters()
    meta = {
        "network": model.config.to_dict(),
        "train": model.train_config.to_dict(),
        "inputs": [spec.to_dict() for spec in network.inputs],
        "knots": None if network.knots is None else [float(k) for k in network.knots],
        "layers": [spec.to_dict() for spec in network.describe()],
        "params": list(params),
        "loss_curve": [report.to_dict() for report in model.loss_curve],
        "features": model.feature_manifest,
    }
    write_arrays(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION, meta, params)


def load_checkpoint(path: Path) -> Model:
    """
    Reads a model written by save_checkpoint.

    Raises:
        ConfigurationError: If the file does not exist.
        CacheFormatError: If the stored parameters do not fit the stored architecture.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"checkpoint {path} does not exist")
    meta, arrays = read_arrays(path, CHECKPOINT_MAGIC, CHECKPOINT_VERSION)
    knots = None if meta["knots"] is None else np.asarray(meta["knots"], dtype=np.float64)
    network = Network(
        [InputSpec.from_dict(spec) for spec in meta["inputs"]],
        NetworkConfig.from_dict(meta["network"]),
        knots,
    )
    params = network.parameters()
    if list(params) != meta["params"]:
        raise CacheFormatError(f"{path}: parameter list does not match the stored architecture")
    for name, value in params.items():
        stored = arrays[name]
        if stored.shape != value.shape:
            raise CacheFormatError(f"{path}: parameter {name} has shape {stored.shape}, expected {value.shape}")
        np.copyto(value, stored)
    return Model(
        network=network,
        train_config=TrainConfig.from_dict(meta["train"]),
        loss_curve=[EpochReport.from_dict(report) for report in meta["loss_curve"]],
        feature_manifest=meta["features"],
    )
