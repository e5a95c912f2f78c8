import math
from pathlib import Path
from typing import Iterable

import numpy as np
from scipy import sparse

from constants import EARTH_RADIUS_M
from exceptions import ConfigurationError, KeyOutOfRangeError, OutOfBoundsError
from geodata.grid import cell_centers_many, haversine_many, inside_bbox, quantize_many
from geodata.models import BoundingBox, GeoPoint, GridSpec
from utils.log import get_logger
from utils.storage import read_arrays, write_arrays

INDEX_MAGIC = b"GEOCTXIX"
INDEX_VERSION = 1


class SpatialIndex:
    """
    Immutable grid-quantized index of keyed weights over a geotagged corpus.

    Only nonempty cells are stored: `cell_flat` holds their sorted flat indices and
    row i of the CSR matrix `cell_weights` holds the per-key weight sums of cell i.
    Distances for radius queries are measured from the query point to cell centers.
    """

    def __init__(self, grid: GridSpec, key_space: int, cell_flat: np.ndarray, cell_weights: sparse.csr_matrix, skipped: int = 0):
        self.grid = grid
        self.key_space = key_space
        self.skipped = skipped
        self._cell_flat = np.asarray(cell_flat, dtype=np.int64)
        self._weights = cell_weights
        rows = self._cell_flat // grid.cols
        cols = self._cell_flat % grid.cols
        self._cell_lon, self._cell_lat = cell_centers_many(rows, cols, grid)
        self._totals = np.asarray(cell_weights.sum(axis=0), dtype=np.float64).ravel()
        for array in (self._cell_flat, self._cell_lon, self._cell_lat, self._totals):
            array.flags.writeable = False

    @property
    def totals(self) -> np.ndarray:
        """Global per-key weight sums over the whole index."""
        return self._totals

    @property
    def nonempty_cells(self) -> int:
        return int(self._cell_flat.size)

    def cell_entries(self) -> list[tuple[int, np.ndarray]]:
        """Every nonempty cell as (flat index, dense per-key weights), ascending by flat index."""
        return [
            (int(flat), self._weights.getrow(i).toarray().ravel())
            for i, flat in enumerate(self._cell_flat)
        ]

    def _candidates(self, center: GeoPoint, radius: float) -> np.ndarray:
        """Positions of nonempty cells whose centers lie in the lon/lat square bounding the query circle."""
        grid = self.grid
        angle = radius / EARTH_RADIUS_M
        dlat = math.degrees(angle)
        lat_lo, lat_hi = center.lat - dlat, center.lat + dlat
        cos_lat = math.cos(math.radians(center.lat))
        if angle >= math.pi or lat_hi >= 90.0 or lat_lo <= -90.0 or math.sin(angle) >= cos_lat:
            lon_lo, lon_hi = -math.inf, math.inf
        else:
            dlon = math.degrees(math.asin(math.sin(angle) / cos_lat))
            lon_lo, lon_hi = center.lon - dlon, center.lon + dlon

        row_lo = max(int(math.floor((lat_lo - grid.bbox.lat_min) / grid.dlat)) - 1, 0)
        row_hi = min(int(math.floor((lat_hi - grid.bbox.lat_min) / grid.dlat)) + 1, grid.rows - 1)
        if lon_lo < -180.0 or lon_hi > 180.0:
            col_lo, col_hi = 0, grid.cols - 1
        else:
            col_lo = max(int(math.floor((lon_lo - grid.bbox.lon_min) / grid.dlon)) - 1, 0)
            col_hi = min(int(math.floor((lon_hi - grid.bbox.lon_min) / grid.dlon)) + 1, grid.cols - 1)
        if row_lo > row_hi or col_lo > col_hi or self._cell_flat.size == 0:
            return np.empty(0, dtype=np.int64)

        row_base = np.arange(row_lo, row_hi + 1, dtype=np.int64) * grid.cols
        starts = np.searchsorted(self._cell_flat, row_base + col_lo, side="left")
        ends = np.searchsorted(self._cell_flat, row_base + col_hi, side="right")
        lengths = ends - starts
        total = int(lengths.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
        return offsets + np.arange(total, dtype=np.int64)

    def radius_profile(self, center: GeoPoint, radii: Iterable[float]) -> np.ndarray:
        """
        Per-key weight sums inside circles of several radii around one center.

        Args:
            center (GeoPoint): Query point, must lie inside the grid bbox.
            radii (Iterable[float]): Radii in meters, each > 0.

        Raises:
            ConfigurationError: If a radius is not positive.
            OutOfBoundsError: If the center lies outside the bbox.

        Returns:
            np.ndarray: Matrix of shape (len(radii), key_space); row i aggregates every
                nonempty cell whose center is within radii[i] (inclusive).
        """
        radii = np.asarray(list(radii), dtype=np.float64)
        if radii.size == 0 or not np.all(radii > 0):
            raise ConfigurationError(f"pooling radii must be > 0, got {radii.tolist()}")
        if not self.grid.bbox.contains(center):
            raise OutOfBoundsError(f"query center (lon={center.lon}, lat={center.lat}) outside bbox {self.grid.bbox.to_list()}")

        profile = np.zeros((radii.size, self.key_space), dtype=np.float64)
        candidates = self._candidates(center, float(radii.max()))
        if candidates.size == 0:
            return profile
        distances = haversine_many(center.lon, center.lat, self._cell_lon[candidates], self._cell_lat[candidates])
        for i, radius in enumerate(radii):
            selected = candidates[distances <= radius]
            if selected.size:
                profile[i] = np.asarray(self._weights[selected].sum(axis=0)).ravel()
        return profile

    def radius_aggregate(self, center: GeoPoint, radius: float) -> np.ndarray:
        """
        Per-key weight sums of all cells whose center is within `radius` meters of `center`.

        Args:
            center (GeoPoint): Query point.
            radius (float): Radius in meters, > 0.

        Returns:
            np.ndarray: Aggregate vector of length key_space.
        """
        return self.radius_profile(center, [radius])[0]

    def save(self, path: Path) -> None:
        """Writes the index to the versioned binary cache format."""
        csr = self._weights
        meta = {
            "grid": {"rows": self.grid.rows, "cols": self.grid.cols, "bbox": self.grid.bbox.to_list()},
            "key_space": self.key_space,
            "skipped": self.skipped,
        }
        write_arrays(path, INDEX_MAGIC, INDEX_VERSION, meta, {
            "cell_flat": self._cell_flat,
            "data": csr.data.astype(np.float64),
            "indices": csr.indices.astype(np.int64),
            "indptr": csr.indptr.astype(np.int64),
        })

    @classmethod
    def load(cls, path: Path) -> "SpatialIndex":
        """Reads an index written by save."""
        meta, arrays = read_arrays(path, INDEX_MAGIC, INDEX_VERSION)
        grid = GridSpec(meta["grid"]["rows"], meta["grid"]["cols"], BoundingBox.from_list(meta["grid"]["bbox"]))
        weights = sparse.csr_matrix(
            (arrays["data"], arrays["indices"], arrays["indptr"]),
            shape=(arrays["cell_flat"].size, meta["key_space"]),
        )
        return cls(grid, meta["key_space"], arrays["cell_flat"], weights, meta["skipped"])


_logger = get_logger("SpatialIndex")


def build_index(records: Iterable[tuple[GeoPoint, int, float]], grid: GridSpec, key_space: int) -> SpatialIndex:
    """
    Builds a spatial index from a stream of (point, key, weight) events.

    The result does not depend on the order of the stream: events are sorted by
    (cell, key, weight) before summation.

    Args:
        records (Iterable[tuple[GeoPoint, int, float]]): Ingestion events; counts use weight 1.
        grid (GridSpec): Pooling grid.
        key_space (int): Number of keys; valid keys are 0..key_space-1.

    Raises:
        KeyOutOfRangeError: If a key is outside the key space.
        ConfigurationError: If a weight is negative or key_space < 1.

    Returns:
        SpatialIndex: The immutable index. Points outside the bbox are skipped and counted.
    """
    if key_space < 1:
        raise ConfigurationError(f"key space must be >= 1, got {key_space}")
    lons, lats, keys, weights = [], [], [], []
    for point, key, weight in records:
        lons.append(point.lon)
        lats.append(point.lat)
        keys.append(key)
        weights.append(weight)
    lon = np.asarray(lons, dtype=np.float64)
    lat = np.asarray(lats, dtype=np.float64)
    key = np.asarray(keys, dtype=np.int64)
    weight = np.asarray(weights, dtype=np.float64)

    bad_keys = key[(key < 0) | (key >= key_space)]
    if bad_keys.size:
        raise KeyOutOfRangeError(f"key {int(bad_keys[0])} outside key space [0, {key_space})")
    if np.any(weight < 0) or not np.all(np.isfinite(weight)):
        raise ConfigurationError("index weights must be finite and >= 0")

    inside = inside_bbox(lon, lat, grid)
    skipped = int((~inside).sum())
    if skipped:
        _logger.warning("Skipped %d of %d points outside bbox %s", skipped, lon.size, grid.bbox.to_list())
    lon, lat, key, weight = lon[inside], lat[inside], key[inside], weight[inside]

    if key.size == 0:
        empty = sparse.csr_matrix((0, key_space), dtype=np.float64)
        return SpatialIndex(grid, key_space, np.empty(0, dtype=np.int64), empty, skipped)

    _, _, flat = quantize_many(lon, lat, grid)
    order = np.lexsort((weight, key, flat))
    flat, key, weight = flat[order], key[order], weight[order]

    change = np.empty(flat.size, dtype=bool)
    change[0] = True
    change[1:] = (flat[1:] != flat[:-1]) | (key[1:] != key[:-1])
    starts = np.flatnonzero(change)
    group_weight = np.add.reduceat(weight, starts)
    group_flat = flat[starts]
    group_key = key[starts]

    cell_flat, cell_pos = np.unique(group_flat, return_inverse=True)
    cell_weights = sparse.csr_matrix((group_weight, (cell_pos, group_key)), shape=(cell_flat.size, key_space))
    cell_weights.sort_indices()
    _logger.info("Built index: %d events, %d nonempty cells, %d keys", key.size, cell_flat.size, key_space)
    return SpatialIndex(grid, key_space, cell_flat, cell_weights, skipped)


def radius_aggregate(index: SpatialIndex, center: GeoPoint, r: float) -> np.ndarray:
    """Module-level form of SpatialIndex.radius_aggregate."""
    return index.radius_aggregate(center, r)
