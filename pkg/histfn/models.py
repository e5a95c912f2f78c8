from dataclasses import dataclass, field

import numpy as np

from exceptions import DimensionMismatchError
from histfn.functions import interpolate, slope


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Histogram value as a function of pooling radius, linear between the radii of R."""

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.float64)
        if knots.ndim != 1 or knots.size < 2 or knots.shape != values.shape:
            raise DimensionMismatchError(f"need >= 2 knots matching values, got {knots.shape} and {values.shape}")
        if not np.all(np.diff(knots) > 0):
            raise DimensionMismatchError("knots must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DimensionMismatchError("function values must be finite")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    def eval(self, rho: float) -> float:
        """Value at rho; clamped to the end values outside the knot range."""
        return float(interpolate(self.knots, self.values, rho))

    def deriv(self, rho: float) -> float:
        """Slope of the segment containing rho (right segment at a knot), 0 outside the knots."""
        return float(slope(self.knots, self.values, rho))


@dataclass(frozen=True)
class HistFnBank:
    """
    Histogram functions of one record, one row of `values` per function.

    Functions are grouped per context feature (`segments` maps the feature name to its
    [start, stop) rows); inside a feature, row b * key_count + key holds normalization b
    (0 across keys, 1 within key) of that key.
    """

    knots: np.ndarray
    values: np.ndarray
    segments: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != self.knots.size:
            raise DimensionMismatchError(f"bank values {self.values.shape} do not match {self.knots.size} knots")

    @property
    def fn_count(self) -> int:
        return self.values.shape[0]

    def functions(self) -> list[PiecewiseLinearFn]:
        return [PiecewiseLinearFn(self.knots, row) for row in self.values]

    def segment(self, name: str) -> np.ndarray:
        start, stop = self.segments[name]
        return self.values[start:stop]


def fit(values_over_r, radii) -> PiecewiseLinearFn:
    """
    Fits the piecewise-linear histogram function through the values computed over R.

    Args:
        values_over_r: Histogram values, one per radius.
        radii: The radius set R (meters, strictly increasing).

    Raises:
        DimensionMismatchError: If the lengths differ.

    Returns:
        PiecewiseLinearFn: Function interpolating the values at the radii.
    """
    if len(values_over_r) != len(radii):
        raise DimensionMismatchError(f"{len(values_over_r)} values for {len(radii)} radii")
    return PiecewiseLinearFn(np.asarray(radii, dtype=np.float64), np.array(values_over_r, dtype=np.float64))
