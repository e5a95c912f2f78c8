import math

import numpy as np

from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError, OutOfBoundsError
from features.models import PixelWindow, RadiiSet, RasterMap, ZipTable
from geodata.grid import haversine_many, quantize
from geodata.models import BoundingBox, GeoPoint, GridSpec
from geodata.spatial_index import SpatialIndex


def gps_encoding(point: GeoPoint, grid: GridSpec) -> np.ndarray:
    """
    Indicator vector of the grid cell containing the point.

    Args:
        point (GeoPoint): Coordinate.
        grid (GridSpec): Encoding grid (rows:cols = 1:2 gives roughly square cells).

    Raises:
        OutOfBoundsError: If the point is outside the grid bbox.

    Returns:
        np.ndarray: One-hot vector of length rows * cols.
    """
    vector = np.zeros(grid.cell_count, dtype=np.float64)
    vector[quantize(point, grid).flat] = 1.0
    return vector


def gps_coordinates(point: GeoPoint, bbox: BoundingBox) -> np.ndarray:
    """Raw coordinate pair rescaled to [0, 1] inside bbox: (lon, lat)."""
    if not bbox.contains(point):
        raise OutOfBoundsError(f"coordinate (lon={point.lon}, lat={point.lat}) outside bbox {bbox.to_list()}")
    return np.array([
        (point.lon - bbox.lon_min) / (bbox.lon_max - bbox.lon_min),
        (point.lat - bbox.lat_min) / (bbox.lat_max - bbox.lat_min),
    ])


def clamp_patch(center_pixel: tuple[int, int], patch_size: int, raster_dims: tuple[int, int]) -> PixelWindow:
    """
    Pixel window of an odd-sized square patch; positions off the raster replicate the nearest edge pixel.

    Args:
        center_pixel (tuple[int, int]): (row, col) of the patch center.
        patch_size (int): Odd side length.
        raster_dims (tuple[int, int]): (rows, cols) of the raster.

    Returns:
        PixelWindow: Clamped row and column indices, each of length patch_size.
    """
    if patch_size < 1 or patch_size % 2 == 0:
        raise ConfigurationError(f"patch size must be odd, got {patch_size}")
    half = patch_size // 2
    row, col = center_pixel
    rows, cols = raster_dims
    return PixelWindow(
        rows=np.clip(np.arange(row - half, row + half + 1), 0, rows - 1),
        cols=np.clip(np.arange(col - half, col + half + 1), 0, cols - 1),
    )


def containing_pixel(point: GeoPoint, raster: RasterMap) -> tuple[int, int]:
    """(row, col) of the raster pixel containing the point; row 0 is the northern edge."""
    bbox = raster.bbox
    if not bbox.contains(point):
        raise OutOfBoundsError(f"coordinate (lon={point.lon}, lat={point.lat}) outside map {raster.name} bbox {bbox.to_list()}")
    row = int(math.floor((bbox.lat_max - point.lat) / ((bbox.lat_max - bbox.lat_min) / raster.rows)))
    col = int(math.floor((point.lon - bbox.lon_min) / ((bbox.lon_max - bbox.lon_min) / raster.cols)))
    return min(row, raster.rows - 1), min(col, raster.cols - 1)


def map_patch(point: GeoPoint, maps: list[RasterMap], patch_size: int = 17) -> np.ndarray:
    """
    Normalized pixel colors of a square patch around the point on every map.

    Args:
        point (GeoPoint): Coordinate.
        maps (list[RasterMap]): Map rasters, in feature order.
        patch_size (int, optional): Patch side in pixels. Defaults to 17.

    Raises:
        ConfigurationError: If no map is given.
        OutOfBoundsError: If the point is outside a map, naming the map.

    Returns:
        np.ndarray: len(maps) * patch_size**2 * 3 values in [0, 1], ordered map, row, column, RGB.
    """
    if not maps:
        raise ConfigurationError("map patch feature needs at least one map")
    parts = []
    for raster in maps:
        window = clamp_patch(containing_pixel(point, raster), patch_size, (raster.rows, raster.cols))
        patch = raster.pixels[np.ix_(window.rows, window.cols)]
        parts.append(patch.reshape(-1).astype(np.float64) / 255.0)
    return np.concatenate(parts)


def acs_feature(point: GeoPoint, table: ZipTable) -> np.ndarray:
    """
    Survey statistics of the zip code whose centroid is nearest to the point.
    Ties go to the lexicographically smallest zip.

    Args:
        point (GeoPoint): Coordinate.
        table (ZipTable): Zip centroids and statistics.

    Raises:
        EmptyInputError: If the table is empty.

    Returns:
        np.ndarray: Statistics vector of the nearest zip.
    """
    if not table.zips:
        raise EmptyInputError("zip table is empty")
    distances = haversine_many(point.lon, point.lat, table.lon, table.lat)
    nearest = int(np.flatnonzero(distances == distances.min())[0])
    return table.stats[nearest].copy()


def context_feature(point: GeoPoint, index: SpatialIndex, key_count: int, radii: RadiiSet) -> np.ndarray:
    """
    Radius-pooled histogram with both normalizations.

    For every radius the key aggregates are normalized (a) by their sum over keys
    inside the radius and (b) by each key's total over the whole index. Zero
    denominators give 0.0. Layout is radius-major, block (a) then (b), key ascending.

    Args:
        point (GeoPoint): Query coordinate.
        index (SpatialIndex): Index keyed by 0..key_count-1.
        key_count (int): Number of keys.
        radii (RadiiSet): Pooling radii.

    Returns:
        np.ndarray: Vector of length 2 * key_count * len(radii).
    """
    if index.key_space != key_count:
        raise DimensionMismatchError(f"index has {index.key_space} keys, feature declares {key_count}")
    profile = index.radius_profile(point, radii.array)
    sums = profile.sum(axis=1, keepdims=True)
    across = np.divide(profile, sums, out=np.zeros_like(profile), where=sums > 0)
    totals = np.broadcast_to(index.totals, profile.shape)
    within = np.divide(profile, totals, out=np.zeros_like(profile), where=totals > 0)
    return np.stack([across, np.minimum(within, 1.0)], axis=1).reshape(-1)


def hashtag_context(point: GeoPoint, index: SpatialIndex, h_size: int, radii: RadiiSet) -> np.ndarray:
    """Hashtag context feature: counts of tagged images around the point, 2 * h_size * len(radii) values."""
    return context_feature(point, index, h_size, radii)


def visual_context(point: GeoPoint, index: SpatialIndex, concept_count: int, radii: RadiiSet) -> np.ndarray:
    """Visual context feature: summed concept probabilities around the point, 2 * concept_count * len(radii) values."""
    return context_feature(point, index, concept_count, radii)
