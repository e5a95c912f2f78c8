import csv
from pathlib import Path

import numpy as np

from exceptions import ConfigurationError
from features.models import RasterMap, ZipTable
from geodata.models import BoundingBox, GeoPoint

RASTER_MAGIC = "GEORASTER v1"


def load_raster(path: Path, name: str | None = None) -> RasterMap:
    """
    Reads a GEORASTER v1 file: three header lines (magic, "rows cols",
    "lon_min lat_min lon_max lat_max") followed by rows*cols*3 RGB bytes.

    Args:
        path (Path): Raster file.
        name (str | None, optional): Map name. Defaults to the file stem.

    Raises:
        ConfigurationError: If the file is missing or malformed.

    Returns:
        RasterMap: The loaded raster.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"map file {path} does not exist")
    data = path.read_bytes()
    lines = data.split(b"\n", 3)
    if len(lines) < 4 or lines[0].strip().decode("ascii", "replace") != RASTER_MAGIC:
        raise ConfigurationError(f"{path}: not a {RASTER_MAGIC} file")
    try:
        rows, cols = (int(v) for v in lines[1].split())
        lon_min, lat_min, lon_max, lat_max = (float(v) for v in lines[2].split())
    except ValueError as exc:
        raise ConfigurationError(f"{path}: malformed raster header ({exc})") from exc
    body = lines[3]
    if len(body) != rows * cols * 3:
        raise ConfigurationError(f"{path}: expected {rows * cols * 3} pixel bytes, found {len(body)}")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(rows, cols, 3).copy()
    bbox = BoundingBox(lon_min=lon_min, lon_max=lon_max, lat_min=lat_min, lat_max=lat_max)
    return RasterMap(name=name or path.stem, rows=rows, cols=cols, bbox=bbox, pixels=pixels)


def write_raster(path: Path, raster: RasterMap) -> None:
    """Writes a raster in the GEORASTER v1 format."""
    bbox = raster.bbox
    header = f"{RASTER_MAGIC}\n{raster.rows} {raster.cols}\n{bbox.lon_min!r} {bbox.lat_min!r} {bbox.lon_max!r} {bbox.lat_max!r}\n"
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header.encode("ascii") + raster.pixels.astype(np.uint8).tobytes())


def load_zip_table(path: Path) -> ZipTable:
    """
    Reads a zip statistics CSV with rows `zip,lon,lat,v1,...,vD`. A header row whose
    second column is not numeric is skipped.

    Args:
        path (Path): CSV file.

    Returns:
        ZipTable: Table sorted by zip code.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"zip table {path} does not exist")
    entries = []
    with open(path, newline="", encoding="utf-8") as f:
        for line_no, row in enumerate(csv.reader(f), start=1):
            if not row:
                continue
            try:
                lon, lat = float(row[1]), float(row[2])
            except (IndexError, ValueError) as exc:
                if line_no == 1:
                    continue
                raise ConfigurationError(f"{path}:{line_no}: malformed zip row ({exc})") from exc
            entries.append((row[0].strip(), GeoPoint(lon, lat), [float(v) for v in row[3:]]))
    return ZipTable.from_entries(entries)
