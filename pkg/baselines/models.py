from dataclasses import dataclass

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError
from geodata.models import GeoPoint


@dataclass(frozen=True)
class ClassDistribution:
    """Probability vector over the classes."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or probs.size == 0:
            raise DimensionMismatchError(f"class distribution must be a nonempty vector, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)) or probs.min() < 0:
            raise ConfigurationError("class probabilities must be finite and >= 0")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise ConfigurationError(f"class probabilities sum to {probs.sum()}, expected 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return self.probs.size

    @classmethod
    def uniform(cls, class_count: int) -> "ClassDistribution":
        return cls(np.full(class_count, 1.0 / class_count))

    @classmethod
    def from_scores(cls, scores: np.ndarray) -> "ClassDistribution":
        """Normalizes nonnegative scores; an all-zero vector becomes uniform."""
        scores = np.asarray(scores, dtype=np.float64)
        total = scores.sum()
        if total <= 0:
            return cls.uniform(scores.size)
        return cls(scores / total)

    @property
    def top(self) -> int:
        return int(np.argmax(self.probs))


@dataclass(frozen=True)
class LabeledPoints:
    """Training coordinates with their class labels, for nearest-neighbor lookups."""

    lon: np.ndarray
    lat: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if not (len(self.lon) == len(self.lat) == len(self.labels)):
            raise DimensionMismatchError("lon, lat and labels must have equal lengths")
        if len(self.labels) == 0:
            raise EmptyInputError("no labeled training points")

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_pairs(cls, pairs: list[tuple[GeoPoint, int]]) -> "LabeledPoints":
        return cls(
            lon=np.array([point.lon for point, _ in pairs], dtype=np.float64),
            lat=np.array([point.lat for point, _ in pairs], dtype=np.float64),
            labels=np.array([label for _, label in pairs], dtype=np.int64),
        )
