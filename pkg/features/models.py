from dataclasses import dataclass, field

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError
from geodata.models import BoundingBox, GeoPoint, GridSpec
from geodata.spatial_index import SpatialIndex
from utils.enums import FeatureName


@dataclass(frozen=True)
class RasterMap:
    """North-up RGB map raster: pixel row 0 is the northern edge of bbox."""

    name: str
    rows: int
    cols: int
    bbox: BoundingBox
    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.shape != (self.rows, self.cols, 3) or self.pixels.dtype != np.uint8:
            raise DimensionMismatchError(
                f"map {self.name}: pixel array {self.pixels.shape}/{self.pixels.dtype} != ({self.rows}, {self.cols}, 3)/uint8"
            )


@dataclass(frozen=True)
class ZipTable:
    """Zip-code centroids and their survey statistics, sorted by zip code."""

    zips: tuple[str, ...]
    lon: np.ndarray
    lat: np.ndarray
    stats: np.ndarray

    def __post_init__(self):
        n = len(self.zips)
        if self.lon.shape != (n,) or self.lat.shape != (n,) or self.stats.ndim != 2 or self.stats.shape[0] != n:
            raise DimensionMismatchError("zip table columns have inconsistent lengths")
        if list(self.zips) != sorted(self.zips):
            raise ConfigurationError("zip table must be sorted by zip code")

    @classmethod
    def from_entries(cls, entries: list[tuple[str, GeoPoint, list[float]]]) -> "ZipTable":
        """Builds a table from (zip, centroid, stats) entries in any order."""
        entries = sorted(entries, key=lambda entry: entry[0])
        dims = {len(entry[2]) for entry in entries}
        if len(dims) > 1:
            raise DimensionMismatchError(f"zip statistics have differing dimensions {sorted(dims)}")
        dim = dims.pop() if dims else 0
        return cls(
            zips=tuple(entry[0] for entry in entries),
            lon=np.array([entry[1].lon for entry in entries], dtype=np.float64),
            lat=np.array([entry[1].lat for entry in entries], dtype=np.float64),
            stats=np.array([entry[2] for entry in entries], dtype=np.float64).reshape(len(entries), dim),
        )

    @property
    def dim(self) -> int:
        return self.stats.shape[1]


@dataclass(frozen=True)
class RadiiSet:
    """Pooling radii R in meters, strictly increasing and positive."""

    radii: tuple[float, ...]

    def __post_init__(self):
        if len(self.radii) < 2:
            raise ConfigurationError(f"radius set needs at least two radii, got {list(self.radii)}")
        if any(r <= 0 for r in self.radii) or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ConfigurationError(f"radii must be positive and strictly increasing, got {list(self.radii)}")

    def __len__(self) -> int:
        return len(self.radii)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.radii, dtype=np.float64)

    @property
    def r_min(self) -> float:
        return self.radii[0]

    @property
    def r_max(self) -> float:
        return self.radii[-1]


@dataclass(frozen=True)
class PixelWindow:
    """Row and column pixel indices of a patch, already clamped to the raster."""

    rows: np.ndarray
    cols: np.ndarray


@dataclass
class FeatureBundle:
    """Named feature vectors of one record, in canonical feature order."""

    record_id: str
    vectors: dict[FeatureName, np.ndarray] = field(default_factory=dict)
    dims: dict[FeatureName, int] = field(default_factory=dict)

    def add(self, name: FeatureName, vector: np.ndarray, dim: int) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (dim,):
            raise DimensionMismatchError(f"record {self.record_id}: feature {name.value} has shape {vector.shape}, declared {dim}")
        if not np.all(np.isfinite(vector)):
            raise DimensionMismatchError(f"record {self.record_id}: feature {name.value} has non-finite entries")
        self.vectors[name] = vector
        self.dims[name] = dim


@dataclass(frozen=True)
class ExtractionConfig:
    """Which location features to extract and their parameters."""

    features: tuple[FeatureName, ...]
    gps_grid: GridSpec
    radii: RadiiSet
    patch_size: int = 17


@dataclass
class FeatureResources:
    """Loaded, immutable resources the extractors read from."""

    maps: list[RasterMap] = field(default_factory=list)
    zip_table: ZipTable | None = None
    hashtag_index: SpatialIndex | None = None
    hashtag_count: int = 0
    concept_index: SpatialIndex | None = None
    concept_count: int = 0
