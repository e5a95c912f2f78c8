import os
import tempfile

os.environ.setdefault("LOGS_DIR", tempfile.mkdtemp(prefix="geoctx-logs-"))

import numpy as np
import pytest

from geodata.grid import cell_center, haversine_m, quantize
from geodata.models import BoundingBox, CellIndex, GeoPoint, GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def small_bbox():
    return BoundingBox.from_list([-100.0, 40.0, -99.0, 41.0])


@pytest.fixture
def small_grid(small_bbox):
    return GridSpec(200, 200, small_bbox)


def random_points(rng, bbox: BoundingBox, n: int) -> list[GeoPoint]:
    lon = rng.uniform(bbox.lon_min, bbox.lon_max, n)
    lat = rng.uniform(bbox.lat_min, bbox.lat_max, n)
    return [GeoPoint(float(x), float(y)) for x, y in zip(lon, lat)]


def random_events(rng, bbox: BoundingBox, n: int, keys: int, weighted: bool = False) -> list[tuple[GeoPoint, int, float]]:
    points = random_points(rng, bbox, n)
    key = rng.integers(0, keys, n)
    weight = rng.random(n) if weighted else np.ones(n)
    return [(p, int(k), float(w)) for p, k, w in zip(points, key, weight)]


def brute_force_aggregate(events, grid: GridSpec, center: GeoPoint, r: float, key_space: int) -> np.ndarray:
    """Per-key sums over every nonempty cell whose center is within r of the query."""
    cells = {}
    for point, key, weight in events:
        if not grid.bbox.contains(point):
            continue
        flat = quantize(point, grid).flat
        cells.setdefault(flat, np.zeros(key_space))[key] += weight
    result = np.zeros(key_space)
    for flat in sorted(cells):
        cell = CellIndex(flat // grid.cols, flat % grid.cols, flat)
        if haversine_m(center, cell_center(cell, grid)) <= r:
            result += cells[flat]
    return result
