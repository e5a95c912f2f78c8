import math

import numpy as np

from constants import EARTH_RADIUS_M
from exceptions import OutOfBoundsError
from geodata.models import CellIndex, GeoPoint, GridSpec


def quantize(point: GeoPoint, grid: GridSpec) -> CellIndex:
    """
    Finds the grid cell containing a point. Points on the max edges fall into the last row/column.

    Args:
        point (GeoPoint): Coordinate to quantize.
        grid (GridSpec): Target grid.

    Raises:
        OutOfBoundsError: If the point lies outside grid.bbox.

    Returns:
        CellIndex: Address of the containing cell.
    """
    if not grid.bbox.contains(point):
        raise OutOfBoundsError(f"coordinate (lon={point.lon}, lat={point.lat}) outside bbox {grid.bbox.to_list()}")
    row = min(int(math.floor((point.lat - grid.bbox.lat_min) / grid.dlat)), grid.rows - 1)
    col = min(int(math.floor((point.lon - grid.bbox.lon_min) / grid.dlon)), grid.cols - 1)
    return CellIndex(row=row, col=col, flat=row * grid.cols + col)


def quantize_many(lon: np.ndarray, lat: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized quantize for points already known to be inside the bbox.

    Args:
        lon (np.ndarray): Longitudes.
        lat (np.ndarray): Latitudes.
        grid (GridSpec): Target grid.

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray]: rows, cols and flat indices (int64).
    """
    rows = np.floor((np.asarray(lat, dtype=np.float64) - grid.bbox.lat_min) / grid.dlat).astype(np.int64)
    cols = np.floor((np.asarray(lon, dtype=np.float64) - grid.bbox.lon_min) / grid.dlon).astype(np.int64)
    rows = np.clip(rows, 0, grid.rows - 1)
    cols = np.clip(cols, 0, grid.cols - 1)
    return rows, cols, rows * grid.cols + cols


def inside_bbox(lon: np.ndarray, lat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Boolean mask of points inside grid.bbox (edges inclusive)."""
    bbox = grid.bbox
    return (lon >= bbox.lon_min) & (lon <= bbox.lon_max) & (lat >= bbox.lat_min) & (lat <= bbox.lat_max)


def cell_from_flat(flat: int, grid: GridSpec) -> CellIndex:
    if not 0 <= flat < grid.cell_count:
        raise OutOfBoundsError(f"flat cell index {flat} outside grid of {grid.cell_count} cells")
    return CellIndex(row=flat // grid.cols, col=flat % grid.cols, flat=flat)


def cell_center(cell: CellIndex, grid: GridSpec) -> GeoPoint:
    """
    Center of a cell's lon/lat rectangle.

    Args:
        cell (CellIndex): Cell address.
        grid (GridSpec): Grid the cell belongs to.

    Raises:
        OutOfBoundsError: If the cell is not a valid cell of the grid.

    Returns:
        GeoPoint: The center coordinate.
    """
    if not (0 <= cell.row < grid.rows and 0 <= cell.col < grid.cols) or cell.flat != cell.row * grid.cols + cell.col:
        raise OutOfBoundsError(f"cell {cell} is not valid for a {grid.rows}x{grid.cols} grid")
    lon = grid.bbox.lon_min + (cell.col + 0.5) * grid.dlon
    lat = grid.bbox.lat_min + (cell.row + 0.5) * grid.dlat
    return GeoPoint(lon, lat)


def cell_centers_many(rows: np.ndarray, cols: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized cell_center returning (lon, lat) arrays."""
    lon = grid.bbox.lon_min + (np.asarray(cols, dtype=np.float64) + 0.5) * grid.dlon
    lat = grid.bbox.lat_min + (np.asarray(rows, dtype=np.float64) + 0.5) * grid.dlat
    return lon, lat


def haversine_many(lon1, lat1, lon2, lat2) -> np.ndarray:
    """
    Great-circle distance in meters, broadcasting over numpy arrays.

    Args:
        lon1, lat1: First coordinates, degrees.
        lon2, lat2: Second coordinates, degrees.

    Returns:
        np.ndarray: Distances in meters.
    """
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    dphi = phi2 - phi1
    dlmb = np.radians(np.asarray(lon2, dtype=np.float64) - np.asarray(lon1, dtype=np.float64))
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """
    Great-circle distance between two points on a sphere of radius 6,371,000 m.

    Args:
        a (GeoPoint): First point.
        b (GeoPoint): Second point.

    Returns:
        float: Distance in meters.
    """
    if a == b:
        return 0.0
    return float(haversine_many(a.lon, a.lat, b.lon, b.lat))
