import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from dataclasses_json import dataclass_json

from exceptions import ConfigurationError, EmptyInputError
from geodata.models import GeoPoint, GeoRecord


@dataclass_json
@dataclass
class CorpusEntry:
    """One line of corpus.jsonl: a keyed (hashtag) occurrence at a coordinate."""

    lon: float
    lat: float
    key: int
    weight: float = 1.0


@dataclass_json
@dataclass
class ConceptEntry:
    """One line of concepts.jsonl: concept probabilities of an image at a coordinate."""

    lon: float
    lat: float
    probs: list[float] = field(default_factory=list)


def _read_jsonl(path: Path) -> Iterator[tuple[int, str]]:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file {path} does not exist")
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if line.strip():
                yield line_no, line


def _write_jsonl(path: Path, items: Iterable) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item.to_dict(), sort_keys=True, separators=(",", ":")))
            f.write("\n")


def read_corpus(path: Path) -> Iterator[tuple[GeoPoint, int, float]]:
    """
    Streams (point, key, weight) ingestion events from corpus.jsonl.

    Args:
        path (Path): corpus file.

    Returns:
        Iterator[tuple[GeoPoint, int, float]]: events in file order.
    """
    for line_no, line in _read_jsonl(path):
        try:
            entry = CorpusEntry.from_json(line)  # pylint: disable=no-member
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}:{line_no}: malformed corpus entry ({exc})") from exc
        yield GeoPoint(entry.lon, entry.lat), int(entry.key), float(entry.weight)


def read_concept_entries(path: Path) -> list[ConceptEntry]:
    entries = []
    for line_no, line in _read_jsonl(path):
        try:
            entries.append(ConceptEntry.from_json(line))  # pylint: disable=no-member
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}:{line_no}: malformed concept entry ({exc})") from exc
    return entries


def concept_count(entries: list[ConceptEntry]) -> int:
    """Concept vocabulary size declared by a concepts file; every line must agree."""
    if not entries:
        raise EmptyInputError("concept corpus is empty")
    sizes = {len(entry.probs) for entry in entries}
    if len(sizes) != 1:
        raise ConfigurationError(f"concept probability vectors have differing lengths {sorted(sizes)}")
    return sizes.pop()


def expand_concepts(entries: list[ConceptEntry]) -> Iterator[tuple[GeoPoint, int, float]]:
    """
    Expands per-image concept probability vectors into (point, concept, probability) events.
    Zero probabilities are dropped; they contribute nothing to weight sums.
    """
    for entry in entries:
        point = GeoPoint(entry.lon, entry.lat)
        for concept, prob in enumerate(entry.probs):
            if prob != 0.0:
                yield point, concept, float(prob)


def read_records(path: Path) -> list[GeoRecord]:
    """
    Reads records.jsonl.

    Args:
        path (Path): records file.

    Raises:
        ConfigurationError: On malformed lines or inconsistent embedding dimensions.

    Returns:
        list[GeoRecord]: records in file order.
    """
    records = []
    for line_no, line in _read_jsonl(path):
        try:
            record = GeoRecord.from_json(line)  # pylint: disable=no-member
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{path}:{line_no}: malformed record ({exc})") from exc
        records.append(record)
    dims = {len(record.embedding) for record in records}
    if len(dims) > 1:
        raise ConfigurationError(f"{path}: embeddings have differing dimensions {sorted(dims)}")
    return records


def write_records(path: Path, records: Iterable[GeoRecord]) -> None:
    _write_jsonl(path, records)


def write_corpus(path: Path, entries: Iterable[CorpusEntry]) -> None:
    _write_jsonl(path, entries)


def write_concepts(path: Path, entries: Iterable[ConceptEntry]) -> None:
    _write_jsonl(path, entries)
