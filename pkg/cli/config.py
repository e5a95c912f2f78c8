"""
Experiment configuration.

Config files use the dotenv key-value format with dotted keys, e.g.

    features = image,hashtag_context
    grid.rows = 2500
    grid.bbox = [-125, 24, -66, 50]
    net.precat = 256
    train.epochs = 30

A key maps to the ExperimentConfig field with dots replaced by underscores. Values
are parsed as JSON when possible and as comma-separated lists otherwise. Keys
prefixed with `synth.` configure the synthetic benchmark (SynthSpec fields).
"""

import json
import typing
from dataclasses import dataclass, field, fields
from pathlib import Path

from dataclasses_json import dataclass_json
from dotenv import dotenv_values

from constants import (
    BATCH_SIZE,
    DEFAULT_BBOX,
    DROPOUT,
    EPOCHS,
    GPS_GRID_COLS,
    GPS_GRID_ROWS,
    LEARNING_RATE,
    LR_GAMMA,
    LR_STEP_EPOCHS,
    MAP_PATCH_SIZE,
    MOMENTUM,
    POOL_GRID_COLS,
    POOL_GRID_ROWS,
    PRIOR_EPSILON,
    PRIOR_K,
    PRIOR_RADIUS_M,
    RADII_M,
    RADIUS_LR_MULT,
    SELECT_ALPHA,
    SELECT_GRID_COLS,
    SELECT_GRID_ROWS,
    SELECT_TOP_N,
    WEIGHT_DECAY,
)
from exceptions import ConfigurationError
from cli.synth import SynthSpec
from features.models import ExtractionConfig, RadiiSet
from geodata.models import BoundingBox, GridSpec
from net.models import NetworkConfig, TrainConfig
from utils.enums import FeatureName, PriorKind


@dataclass_json
@dataclass
class ExperimentConfig:
    """Resolved settings of one run: features, grids, resources, network, training, priors and selection."""

    seed: int | None = None
    features: list[str] = field(default_factory=lambda: [FeatureName.IMAGE.value])

    grid_bbox: list[float] = field(default_factory=lambda: list(DEFAULT_BBOX))
    grid_rows: int = POOL_GRID_ROWS
    grid_cols: int = POOL_GRID_COLS
    gps_rows: int = GPS_GRID_ROWS
    gps_cols: int = GPS_GRID_COLS
    radii: list[float] = field(default_factory=lambda: list(RADII_M))
    map_patch_size: int = MAP_PATCH_SIZE

    records_train: str | None = None
    records_test: str | None = None
    maps: list[str] = field(default_factory=list)
    acs: str | None = None
    corpus: str | None = None
    concepts: str | None = None
    hashtag_count: int | None = None
    class_count: int | None = None

    net_precat: int = 0
    net_postcat: int = 0
    net_rl_replicas: int = 0
    net_dropout: float = DROPOUT

    train_lr: float = LEARNING_RATE
    train_momentum: float = MOMENTUM
    train_weight_decay: float = WEIGHT_DECAY
    train_epochs: int = EPOCHS
    train_lr_step: int = LR_STEP_EPOCHS
    train_lr_gamma: float = LR_GAMMA
    train_batch_size: int = BATCH_SIZE
    train_radius_lr_mult: float = RADIUS_LR_MULT

    prior_kind: str = PriorKind.KNN.value
    prior_k: int = PRIOR_K
    prior_radius_m: float = PRIOR_RADIUS_M
    prior_epsilon: float = PRIOR_EPSILON

    select_rows: int = SELECT_GRID_ROWS
    select_cols: int = SELECT_GRID_COLS
    select_alpha: float = SELECT_ALPHA
    select_top_n: int = SELECT_TOP_N
    select_threshold: float | None = None

    ablate_feature_sets: list[str] = field(default_factory=list)
    ablate_precat: list[int] = field(default_factory=lambda: [0, 256])
    ablate_postcat: list[int] = field(default_factory=lambda: [0])
    ablate_rl: list[int] = field(default_factory=lambda: [0, 5, 10])

    def __post_init__(self):
        try:
            FeatureName.ordered(self.features)
            PriorKind(self.prior_kind)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
        for names in self.ablate_feature_sets:
            FeatureName.ordered(names.split("+"))

    @property
    def feature_names(self) -> list[FeatureName]:
        """Enabled features in canonical order, image always included."""
        return FeatureName.ordered([FeatureName.IMAGE.value, *self.features])

    @property
    def bbox(self) -> BoundingBox:
        return BoundingBox.from_list(self.grid_bbox)

    def pool_grid(self) -> GridSpec:
        return GridSpec(self.grid_rows, self.grid_cols, self.bbox)

    def gps_grid(self) -> GridSpec:
        return GridSpec(self.gps_rows, self.gps_cols, self.bbox)

    def select_grid(self) -> GridSpec:
        return GridSpec(self.select_rows, self.select_cols, self.bbox)

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            features=tuple(self.feature_names),
            gps_grid=self.gps_grid(),
            radii=RadiiSet(tuple(float(r) for r in self.radii)),
            patch_size=self.map_patch_size,
        )

    def network_config(self, class_count: int) -> NetworkConfig:
        return NetworkConfig(
            class_count=class_count,
            precat=self.net_precat,
            postcat=self.net_postcat,
            rl_replicas=self.net_rl_replicas,
            dropout=self.net_dropout,
        )

    def train_config(self) -> TrainConfig:
        if self.seed is None:
            raise ConfigurationError("training needs a seed, pass --seed")
        return TrainConfig(
            seed=self.seed,
            lr=self.train_lr,
            momentum=self.train_momentum,
            weight_decay=self.train_weight_decay,
            epochs=self.train_epochs,
            lr_step=self.train_lr_step,
            lr_gamma=self.train_lr_gamma,
            batch_size=self.train_batch_size,
            radius_lr_mult=self.train_radius_lr_mult,
        )


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}


def _is_list(name: str) -> bool:
    return typing.get_origin(_FIELDS[name].type) is list or _FIELDS[name].type is list


def parse_value(raw: str | None):
    """JSON value, or a list of JSON values/strings when the text has commas."""
    if raw is None:
        return None
    text = raw.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [parse_value(part) for part in text.split(",") if part.strip()]
    return text


def _field_name(key: str) -> str:
    name = key.strip().replace(".", "_").replace("-", "_")
    if name not in _FIELDS:
        raise ConfigurationError(f"unknown config key {key!r}")
    return name


def _coerce(name: str, value):
    if _is_list(name) and value is not None and not isinstance(value, list):
        return [value]
    return value


def load_config(path: Path | None = None, overrides: dict[str, str] | None = None, **flags) -> ExperimentConfig:
    """
    Resolves a config: defaults, then the file, then `--set` overrides, then flags.

    Args:
        path (Path | None): dotenv-format config file.
        overrides (dict[str, str] | None): Raw `key=value` overrides.
        **flags: Values of dedicated command-line flags, keyed by field name; None is ignored.

    Raises:
        ConfigurationError: On a missing file, unknown key or invalid value.

    Returns:
        ExperimentConfig: The resolved config.
    """
    values = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        for key, raw in dotenv_values(path).items():
            if key.startswith("synth."):
                continue
            name = _field_name(key)
            values[name] = _coerce(name, parse_value(raw))
    for key, raw in (overrides or {}).items():
        name = _field_name(key)
        values[name] = _coerce(name, parse_value(raw))
    for key, value in flags.items():
        if value is not None:
            values[_field_name(key)] = value
    try:
        return ExperimentConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc


def parse_overrides(pairs: list[str]) -> dict[str, str]:
    """Splits `--set key=value` arguments."""
    overrides = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigurationError(f"override {pair!r} is not key=value")
        overrides[key.strip()] = value
    return overrides


def load_synth_spec(path: Path | None = None, overrides: dict[str, str] | None = None, **flags) -> SynthSpec:
    """
    Resolves a SynthSpec from the `synth.*` keys of a config file, `--set` overrides
    and flags, in increasing precedence.

    Raises:
        ConfigurationError: On a missing file, unknown key or invalid value.
    """
    raw = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file {path} does not exist")
        raw.update({key: value for key, value in dotenv_values(path).items() if key.startswith("synth.")})
    raw.update(overrides or {})
    known = {f.name for f in fields(SynthSpec)}
    values = {}
    for key, value in raw.items():
        name = key.strip().removeprefix("synth.").replace(".", "_")
        if name not in known:
            raise ConfigurationError(f"unknown synth key {key!r}")
        values[name] = parse_value(value)
    values.update({key: value for key, value in flags.items() if value is not None})
    try:
        return SynthSpec(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"invalid synth spec: {exc}") from exc
