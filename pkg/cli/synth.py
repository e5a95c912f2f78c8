from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from dataclasses_json import dataclass_json

from constants import DEFAULT_BBOX
from exceptions import ConfigurationError
from geodata.io import ConceptEntry, CorpusEntry, write_concepts, write_corpus, write_records
from geodata.models import BoundingBox, GeoRecord
from utils.functions import make_rng
from utils.log import get_logger

KM_PER_DEGREE = 111.195


@dataclass_json
@dataclass(frozen=True)
class SynthSpec:
    """
    Synthetic benchmark. Location-sensitive classes live in a few Gaussian blobs
    (`blobs` per class, `sigma_km` wide); the remaining classes are uniform over the
    bbox. Embeddings are `snr` times a random unit class direction plus unit noise.
    """

    seed: int
    class_count: int = 20
    sensitive_count: int = 15
    train_records: int = 5000
    test_records: int = 1000
    bbox: list[float] = field(default_factory=lambda: list(DEFAULT_BBOX))
    blobs: int = 2
    sigma_km: float = 3.0
    embedding_dim: int = 32
    snr: float = 1.5
    corpus_events: int = 20000
    concept_count: int = 16
    concept_images: int = 5000

    def __post_init__(self):
        if self.class_count < 1 or self.train_records < 1 or self.blobs < 1 or self.embedding_dim < 1:
            raise ConfigurationError("class count, train records, blobs and embedding dim must be >= 1")
        if self.test_records < 0 or self.corpus_events < 0 or self.concept_images < 0 or self.concept_count < 1:
            raise ConfigurationError("record and corpus counts must be >= 0, concept count >= 1")
        if not 0 <= self.sensitive_count <= self.class_count:
            raise ConfigurationError(f"sensitive_count must be in [0, {self.class_count}]")
        if self.snr < 0 or self.sigma_km <= 0:
            raise ConfigurationError("snr must be >= 0 and sigma_km > 0")
        BoundingBox.from_list(self.bbox)

    @property
    def bounding_box(self) -> BoundingBox:
        return BoundingBox.from_list(self.bbox)


@dataclass
class SynthData:
    records_train: list[GeoRecord]
    records_test: list[GeoRecord]
    corpus: list[CorpusEntry]
    concepts: list[ConceptEntry]


class SyntheticWorld:
    """Class layout (blob centers, embedding directions) and samplers of one SynthSpec."""

    _logger = get_logger("SyntheticWorld")

    def __init__(self, spec: SynthSpec):
        self.spec = spec
        self.bbox = spec.bounding_box
        layout = make_rng(spec.seed, "synth.layout")
        lon_margin = 0.05 * (self.bbox.lon_max - self.bbox.lon_min)
        lat_margin = 0.05 * (self.bbox.lat_max - self.bbox.lat_min)
        self.centers_lon = layout.uniform(self.bbox.lon_min + lon_margin, self.bbox.lon_max - lon_margin, (spec.class_count, spec.blobs))
        self.centers_lat = layout.uniform(self.bbox.lat_min + lat_margin, self.bbox.lat_max - lat_margin, (spec.class_count, spec.blobs))
        directions = layout.standard_normal((spec.class_count, spec.embedding_dim))
        self.directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)

    def is_sensitive(self, label: int) -> bool:
        return label < self.spec.sensitive_count

    def locations(self, labels: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates of samples with the given labels, clipped to the bbox."""
        n = labels.size
        uniform_lon = rng.uniform(self.bbox.lon_min, self.bbox.lon_max, n)
        uniform_lat = rng.uniform(self.bbox.lat_min, self.bbox.lat_max, n)
        blob = rng.integers(0, self.spec.blobs, n)
        offsets = rng.standard_normal((n, 2)) * self.spec.sigma_km / KM_PER_DEGREE
        center_lat = self.centers_lat[labels, blob]
        blob_lat = center_lat + offsets[:, 1]
        blob_lon = self.centers_lon[labels, blob] + offsets[:, 0] / np.cos(np.radians(center_lat))
        sensitive = labels < self.spec.sensitive_count
        lon = np.clip(np.where(sensitive, blob_lon, uniform_lon), self.bbox.lon_min, self.bbox.lon_max)
        lat = np.clip(np.where(sensitive, blob_lat, uniform_lat), self.bbox.lat_min, self.bbox.lat_max)
        return lon, lat

    def records(self, count: int, split: str) -> list[GeoRecord]:
        rng = make_rng(self.spec.seed, f"synth.{split}")
        labels = rng.integers(0, self.spec.class_count, count)
        lon, lat = self.locations(labels, rng)
        embeddings = self.spec.snr * self.directions[labels] + rng.standard_normal((count, self.spec.embedding_dim))
        return [
            GeoRecord(
                id=f"{split}-{i:06d}",
                lon=float(lon[i]),
                lat=float(lat[i]),
                embedding=[float(v) for v in embeddings[i]],
                label=int(labels[i]),
                tags=[int(labels[i])],
            )
            for i in range(count)
        ]

    def corpus(self) -> list[CorpusEntry]:
        """Hashtag occurrences; the hashtag id of a class is its class id."""
        rng = make_rng(self.spec.seed, "synth.corpus")
        keys = rng.integers(0, self.spec.class_count, self.spec.corpus_events)
        lon, lat = self.locations(keys, rng)
        return [CorpusEntry(lon=float(x), lat=float(y), key=int(k)) for x, y, k in zip(lon, lat, keys)]

    def concepts(self) -> list[ConceptEntry]:
        """Concept probabilities of unlabeled images; class c mostly shows concept c mod concept_count."""
        rng = make_rng(self.spec.seed, "synth.concepts")
        count = self.spec.concept_images
        labels = rng.integers(0, self.spec.class_count, count)
        lon, lat = self.locations(labels, rng)
        probs = 0.4 * rng.dirichlet(np.ones(self.spec.concept_count), count)
        probs[np.arange(count), labels % self.spec.concept_count] += 0.6
        return [
            ConceptEntry(lon=float(x), lat=float(y), probs=[float(p) for p in row])
            for x, y, row in zip(lon, lat, probs)
        ]

    def generate(self) -> SynthData:
        data = SynthData(
            records_train=self.records(self.spec.train_records, "train"),
            records_test=self.records(self.spec.test_records, "test"),
            corpus=self.corpus(),
            concepts=self.concepts(),
        )
        self._logger.info(
            "Generated %d train, %d test records, %d corpus events, %d concept images",
            len(data.records_train), len(data.records_test), len(data.corpus), len(data.concepts),
        )
        return data


def write_synth(data: SynthData, out_dir: Path) -> list[Path]:
    """Writes records_train.jsonl, records_test.jsonl, corpus.jsonl and concepts.jsonl."""
    out_dir = Path(out_dir)
    paths = [out_dir / name for name in ("records_train.jsonl", "records_test.jsonl", "corpus.jsonl", "concepts.jsonl")]
    write_records(paths[0], data.records_train)
    write_records(paths[1], data.records_test)
    write_corpus(paths[2], data.corpus)
    write_concepts(paths[3], data.concepts)
    return paths
