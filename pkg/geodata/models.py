import math
from dataclasses import dataclass, field

from dataclasses_json import dataclass_json

from exceptions import ConfigurationError, OutOfBoundsError


@dataclass(frozen=True)
class GeoPoint:
    """A (longitude, latitude) pair in degrees."""

    lon: float
    lat: float

    def __post_init__(self):
        if not (math.isfinite(self.lon) and -180.0 <= self.lon <= 180.0):
            raise OutOfBoundsError(f"longitude {self.lon} outside [-180, 180]")
        if not (math.isfinite(self.lat) and -90.0 <= self.lat <= 90.0):
            raise OutOfBoundsError(f"latitude {self.lat} outside [-90, 90]")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned lon/lat rectangle, degrees."""

    lon_min: float
    lon_max: float
    lat_min: float
    lat_max: float

    def __post_init__(self):
        if not self.lon_min < self.lon_max:
            raise ConfigurationError(f"bbox lon_min {self.lon_min} must be < lon_max {self.lon_max}")
        if not self.lat_min < self.lat_max:
            raise ConfigurationError(f"bbox lat_min {self.lat_min} must be < lat_max {self.lat_max}")

    @classmethod
    def from_list(cls, values) -> "BoundingBox":
        """
        Builds a box from the config ordering [lon_min, lat_min, lon_max, lat_max].

        Args:
            values: four numbers.

        Returns:
            BoundingBox: the box.
        """
        if len(values) != 4:
            raise ConfigurationError(f"bbox needs 4 values [lon_min, lat_min, lon_max, lat_max], got {list(values)}")
        lon_min, lat_min, lon_max, lat_max = (float(v) for v in values)
        return cls(lon_min=lon_min, lon_max=lon_max, lat_min=lat_min, lat_max=lat_max)

    def to_list(self) -> list[float]:
        return [self.lon_min, self.lat_min, self.lon_max, self.lat_max]

    def contains(self, point: GeoPoint) -> bool:
        return self.lon_min <= point.lon <= self.lon_max and self.lat_min <= point.lat <= self.lat_max

    @property
    def spans_all_longitudes(self) -> bool:
        return self.lon_max - self.lon_min >= 360.0


@dataclass(frozen=True)
class GridSpec:
    """Regular lon/lat grid over a bounding box: rows divide latitude, cols divide longitude."""

    rows: int
    cols: int
    bbox: BoundingBox

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ConfigurationError(f"grid must have at least one row and column, got {self.rows}x{self.cols}")
        if self.rows * self.cols >= 2**62:
            raise ConfigurationError(f"grid {self.rows}x{self.cols} exceeds the addressable cell range")

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    @property
    def dlat(self) -> float:
        return (self.bbox.lat_max - self.bbox.lat_min) / self.rows

    @property
    def dlon(self) -> float:
        return (self.bbox.lon_max - self.bbox.lon_min) / self.cols


@dataclass(frozen=True)
class CellIndex:
    """Grid cell address; flat = row * cols + col."""

    row: int
    col: int
    flat: int


@dataclass_json
@dataclass
class GeoRecord:
    """One geotagged sample: image embedding from the frozen image tower plus hashtag ids."""

    id: str
    lon: float
    lat: float
    embedding: list[float]
    label: int | None = None
    tags: list[int] = field(default_factory=list)

    @property
    def point(self) -> GeoPoint:
        return GeoPoint(self.lon, self.lat)
