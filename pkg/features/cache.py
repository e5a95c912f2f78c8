from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from exceptions import ConfigurationError, DimensionMismatchError
from histfn.functions import functions_to_context
from histfn.models import HistFnBank
from utils.enums import FeatureName
from utils.storage import read_arrays, write_arrays

CACHE_MAGIC = b"GEOCTXFC"
CACHE_VERSION = 1


@dataclass
class FeatureDataset:
    """
    Extracted features of a record set.

    Non-context features are kept as (n, dim) matrices (CSR for the one-hot GPS
    encoding). Context features are kept only as histogram function banks:
    `bank_values[i]` is the HistFnBank of record i, `segments[name]` its rows for
    one context feature; the flat feature vector is a reshape of those rows.
    """

    ids: list[str]
    labels: np.ndarray
    lon: np.ndarray
    lat: np.ndarray
    class_count: int
    dims: dict[FeatureName, int]
    features: dict[FeatureName, np.ndarray | sparse.csr_matrix] = field(default_factory=dict)
    knots: np.ndarray | None = None
    bank_values: np.ndarray | None = None
    segments: dict[FeatureName, tuple[int, int]] = field(default_factory=dict)
    key_counts: dict[FeatureName, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def has_labels(self) -> bool:
        return bool(np.all(self.labels >= 0))

    def bank(self, i: int) -> HistFnBank:
        """Histogram function bank of record i."""
        if self.bank_values is None:
            raise ConfigurationError("dataset has no context features")
        segments = {name.value: span for name, span in self.segments.items()}
        return HistFnBank(self.knots, self.bank_values[i], segments)

    def functions(self, name: FeatureName, indices: np.ndarray) -> np.ndarray:
        """Bank rows of a context feature for the given records, shape (len(indices), F, R)."""
        if name not in self.segments:
            raise ConfigurationError(f"context feature {name.value} was not extracted")
        start, stop = self.segments[name]
        return self.bank_values[indices, start:stop, :]

    def matrix(self, name: FeatureName, indices: np.ndarray):
        """Feature rows for the given records: ndarray, or CSR for sparse features."""
        if name in self.segments:
            return functions_to_context(self.functions(name, indices))
        if name not in self.features:
            raise ConfigurationError(f"feature {name.value} was not extracted")
        return self.features[name][indices]

    def check_labels(self) -> None:
        if not self.has_labels:
            raise ConfigurationError("dataset contains unlabeled records")
        if self.labels.size and self.labels.max() >= self.class_count:
            raise DimensionMismatchError(f"label {int(self.labels.max())} outside {self.class_count} classes")

    def manifest(self) -> dict:
        """Dimension manifest: per-feature dims, context layout and radii."""
        return {
            "class_count": self.class_count,
            "dims": {name.value: dim for name, dim in self.dims.items()},
            "segments": {name.value: list(span) for name, span in self.segments.items()},
            "key_counts": {name.value: count for name, count in self.key_counts.items()},
            "knots": None if self.knots is None else [float(k) for k in self.knots],
            "records": len(self.ids),
        }

    def save(self, path: Path) -> None:
        """Writes the dataset in the versioned binary cache format."""
        meta = self.manifest()
        meta["ids"] = list(self.ids)
        arrays = {"labels": self.labels, "lon": self.lon, "lat": self.lat}
        for name, matrix in self.features.items():
            if sparse.issparse(matrix):
                csr = sparse.csr_matrix(matrix)
                arrays[f"{name.value}.data"] = csr.data.astype(np.float64)
                arrays[f"{name.value}.indices"] = csr.indices.astype(np.int64)
                arrays[f"{name.value}.indptr"] = csr.indptr.astype(np.int64)
            else:
                arrays[name.value] = np.asarray(matrix, dtype=np.float64)
        if self.bank_values is not None:
            arrays["histfn.knots"] = self.knots
            arrays["histfn.values"] = self.bank_values
        write_arrays(path, CACHE_MAGIC, CACHE_VERSION, meta, arrays)

    @classmethod
    def load(cls, path: Path) -> "FeatureDataset":
        """Reads a dataset written by save."""
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"feature cache {path} does not exist")
        meta, arrays = read_arrays(path, CACHE_MAGIC, CACHE_VERSION)
        dims = {name: meta["dims"][name.value] for name in FeatureName.ordered(meta["dims"])}
        segments = {FeatureName(name): tuple(span) for name, span in meta["segments"].items()}
        n = len(meta["ids"])
        features = {}
        for name in dims:
            if name in segments:
                continue
            if f"{name.value}.data" in arrays:
                features[name] = sparse.csr_matrix(
                    (arrays[f"{name.value}.data"], arrays[f"{name.value}.indices"], arrays[f"{name.value}.indptr"]),
                    shape=(n, dims[name]),
                )
            else:
                features[name] = arrays[name.value]
        return cls(
            ids=meta["ids"],
            labels=arrays["labels"],
            lon=arrays["lon"],
            lat=arrays["lat"],
            class_count=meta["class_count"],
            dims=dims,
            features=features,
            knots=arrays.get("histfn.knots"),
            bank_values=arrays.get("histfn.values"),
            segments=segments,
            key_counts={FeatureName(name): count for name, count in meta["key_counts"].items()},
        )
