"""
Versioned binary container for named numpy arrays.

Layout: 8-byte magic, uint32 version, uint32 header length (little endian),
canonical JSON header, then the raw little-endian bytes of every array in the
order listed by the header. Nothing time-dependent is written, so equal inputs
produce byte-identical files.
"""

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from exceptions import CacheFormatError

_PREFIX = struct.Struct("<8sII")


def write_arrays(path: Path, magic: bytes, version: int, meta: dict[str, Any], arrays: dict[str, np.ndarray]) -> None:
    """
    Writes named arrays with a metadata header.

    Args:
        path (Path): Output file.
        magic (bytes): 8-byte file type tag.
        version (int): Format version stored in the file.
        meta (dict[str, Any]): JSON-serializable metadata echoed in the header.
        arrays (dict[str, np.ndarray]): Arrays in declared order.
    """
    if len(magic) != 8:
        raise ValueError("magic must be exactly 8 bytes")
    layout = []
    blobs = []
    for name, array in arrays.items():
        array = np.ascontiguousarray(array)
        dtype = array.dtype.newbyteorder("<") if array.dtype.byteorder == ">" else array.dtype
        array = array.astype(dtype, copy=False)
        layout.append({"name": name, "dtype": dtype.str, "shape": list(array.shape)})
        blobs.append(array.tobytes(order="C"))
    header = json.dumps({"meta": meta, "arrays": layout}, sort_keys=True, separators=(",", ":")).encode("utf-8")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(_PREFIX.pack(magic, version, len(header)))
        f.write(header)
        for blob in blobs:
            f.write(blob)


def read_arrays(path: Path, magic: bytes, version: int) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """
    Reads a file produced by write_arrays.

    Args:
        path (Path): Input file.
        magic (bytes): Expected file type tag.
        version (int): Expected format version.

    Raises:
        CacheFormatError: On wrong magic, version or truncated content.

    Returns:
        tuple[dict[str, Any], dict[str, np.ndarray]]: metadata and arrays in declared order.
    """
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise CacheFormatError(f"{path}: file too short")
    file_magic, file_version, header_len = _PREFIX.unpack_from(data)
    if file_magic != magic:
        raise CacheFormatError(f"{path}: expected magic {magic!r}, found {file_magic!r}")
    if file_version != version:
        raise CacheFormatError(f"{path}: unsupported version {file_version} (expected {version})")
    offset = _PREFIX.size
    header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    offset += header_len

    arrays = {}
    for entry in header["arrays"]:
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dtype.itemsize * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(data):
            raise CacheFormatError(f"{path}: truncated array {entry['name']}")
        if nbytes == 0:
            arrays[entry["name"]] = np.empty(shape, dtype=dtype)
            continue
        arrays[entry["name"]] = np.frombuffer(data, dtype=dtype, count=nbytes // dtype.itemsize, offset=offset).reshape(shape).copy()
        offset += nbytes
    return header["meta"], arrays
