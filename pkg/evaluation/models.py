from dataclasses import dataclass

import numpy as np
from dataclasses_json import dataclass_json

from exceptions import ConfigurationError, DimensionMismatchError, KeyOutOfRangeError
from utils.functions import format_percent


@dataclass(frozen=True)
class PredictionSet:
    """Score vectors of test records with their ground-truth labels."""

    ids: list[str]
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if scores.ndim != 2 or scores.shape[0] != labels.shape[0] or len(self.ids) != labels.shape[0]:
            raise DimensionMismatchError(
                f"{len(self.ids)} ids, scores {scores.shape} and {labels.shape[0]} labels do not line up"
            )
        if not np.all(np.isfinite(scores)):
            raise ConfigurationError("prediction scores must be finite")
        if labels.size and (labels.min() < 0 or labels.max() >= scores.shape[1]):
            raise KeyOutOfRangeError(f"label outside [0, {scores.shape[1]})")
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size

    @property
    def class_count(self) -> int:
        return self.scores.shape[1]

    @property
    def id_rank(self) -> np.ndarray:
        """Position of every record in ascending id order, the tie-break key."""
        order = np.argsort(np.asarray(self.ids), kind="stable")
        rank = np.empty(order.size, dtype=np.int64)
        rank[order] = np.arange(order.size)
        return rank


@dataclass_json
@dataclass(frozen=True)
class ClassMetrics:
    """Per-class row of metrics.csv. `ap` is None when the class has no test positives."""

    class_id: int
    ap: float | None
    acc1: float | None
    acc5: float | None
    n_test: int


@dataclass_json
@dataclass(frozen=True)
class EvaluationSummary:
    """Class-averaged metrics of one experiment."""

    name: str
    mean_ap: float
    acc1: float
    acc5: float
    n_test: int

    def table_row(self) -> str:
        return f"{self.name} | {format_percent(self.mean_ap)} | {format_percent(self.acc1)} | {format_percent(self.acc5)}"
