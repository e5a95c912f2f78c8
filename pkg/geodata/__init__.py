from geodata.grid import cell_center, haversine_m, quantize
from geodata.models import BoundingBox, CellIndex, GeoPoint, GeoRecord, GridSpec
from geodata.spatial_index import SpatialIndex, build_index, radius_aggregate

__all__ = [
    "BoundingBox",
    "CellIndex",
    "GeoPoint",
    "GeoRecord",
    "GridSpec",
    "SpatialIndex",
    "build_index",
    "cell_center",
    "haversine_m",
    "quantize",
    "radius_aggregate",
]
