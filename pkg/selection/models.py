from dataclasses import dataclass

import numpy as np
from dataclasses_json import dataclass_json

from exceptions import ConfigurationError, DimensionMismatchError
from geodata.models import GridSpec


@dataclass(frozen=True)
class GeoDistribution:
    """
    Probability of every cell of a grid. Stored densely: selection grids are coarse
    (100x200 by default), so a full vector is smaller than a sparse map of most cells.
    """

    grid: GridSpec
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (self.grid.cell_count,):
            raise DimensionMismatchError(f"distribution has {probs.shape} entries, grid has {self.grid.cell_count} cells")
        if probs.min() < 0 or abs(probs.sum() - 1.0) > 1e-9:
            raise ConfigurationError("cell probabilities must be >= 0 and sum to 1")
        object.__setattr__(self, "probs", probs)

    @property
    def support(self) -> np.ndarray:
        """Flat indices of cells with nonzero probability."""
        return np.flatnonzero(self.probs)

    def prob(self, flat: int) -> float:
        return float(self.probs[flat])


@dataclass_json
@dataclass(frozen=True)
class ClassDivergence:
    """One row of the selection ranking."""

    class_id: int
    kl_nats: float
    rank: int
