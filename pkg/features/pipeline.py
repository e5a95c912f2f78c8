from pathlib import Path

import numpy as np
from scipy import sparse

from constants import MAP_COUNT
from exceptions import ConfigurationError, GeoContextException
from features.cache import FeatureDataset
from features.extractors import (
    acs_feature,
    gps_coordinates,
    gps_encoding,
    hashtag_context,
    map_patch,
    visual_context,
)
from features.io import load_raster, load_zip_table
from features.models import ExtractionConfig, FeatureBundle, FeatureResources
from geodata.io import concept_count, expand_concepts, read_concept_entries, read_corpus
from geodata.models import GeoRecord, GridSpec
from geodata.spatial_index import build_index
from histfn.functions import context_to_functions
from utils.enums import FeatureName
from utils.log import get_logger


def feature_dims(config: ExtractionConfig, resources: FeatureResources, embedding_dim: int) -> dict[FeatureName, int]:
    """
    Declared dimension of every enabled feature.

    Args:
        config (ExtractionConfig): Enabled features and parameters.
        resources (FeatureResources): Loaded resources.
        embedding_dim (int): Image embedding length.

    Raises:
        ConfigurationError: If an enabled feature lacks its resource.

    Returns:
        dict[FeatureName, int]: Dimensions in canonical feature order, image first.
    """
    dims = {FeatureName.IMAGE: embedding_dim}
    for name in FeatureName.ordered(config.features):
        match name:
            case FeatureName.IMAGE:
                continue
            case FeatureName.GPS_COORDINATES:
                dims[name] = 2
            case FeatureName.GPS_ENCODING:
                dims[name] = config.gps_grid.cell_count
            case FeatureName.MAP_PATCH:
                if not resources.maps:
                    raise ConfigurationError("map_patch enabled but no maps configured")
                dims[name] = len(resources.maps) * config.patch_size**2 * 3
            case FeatureName.ACS:
                if resources.zip_table is None:
                    raise ConfigurationError("acs enabled but no zip table configured")
                dims[name] = resources.zip_table.dim
            case FeatureName.HASHTAG_CONTEXT:
                if resources.hashtag_index is None:
                    raise ConfigurationError("hashtag_context enabled but no hashtag corpus configured")
                dims[name] = 2 * resources.hashtag_count * len(config.radii)
            case FeatureName.VISUAL_CONTEXT:
                if resources.concept_index is None:
                    raise ConfigurationError("visual_context enabled but no concept corpus configured")
                dims[name] = 2 * resources.concept_count * len(config.radii)
    return dims


def assemble(record: GeoRecord, config: ExtractionConfig, resources: FeatureResources) -> FeatureBundle:
    """
    Extracts the image embedding plus every enabled location feature of one record.

    Args:
        record (GeoRecord): The record.
        config (ExtractionConfig): Enabled features and parameters.
        resources (FeatureResources): Loaded resources.

    Returns:
        FeatureBundle: Vectors with their declared dimensions.
    """
    dims = feature_dims(config, resources, len(record.embedding))
    point = record.point
    bundle = FeatureBundle(record_id=record.id)
    for name, dim in dims.items():
        match name:
            case FeatureName.IMAGE:
                vector = np.asarray(record.embedding, dtype=np.float64)
            case FeatureName.GPS_COORDINATES:
                vector = gps_coordinates(point, config.gps_grid.bbox)
            case FeatureName.GPS_ENCODING:
                vector = gps_encoding(point, config.gps_grid)
            case FeatureName.MAP_PATCH:
                vector = map_patch(point, resources.maps, config.patch_size)
            case FeatureName.ACS:
                vector = acs_feature(point, resources.zip_table)
            case FeatureName.HASHTAG_CONTEXT:
                vector = hashtag_context(point, resources.hashtag_index, resources.hashtag_count, config.radii)
            case FeatureName.VISUAL_CONTEXT:
                vector = visual_context(point, resources.concept_index, resources.concept_count, config.radii)
        bundle.add(name, vector, dim)
    return bundle


def load_resources(
    config: ExtractionConfig,
    pool_grid: GridSpec,
    maps: list[Path] = (),
    acs: Path | None = None,
    corpus: Path | None = None,
    hashtag_count: int | None = None,
    concepts: Path | None = None,
) -> FeatureResources:
    """
    Loads the resources needed by the enabled features.

    Args:
        config (ExtractionConfig): Enabled features.
        pool_grid (GridSpec): Quantization grid of the context indexes.
        maps (list[Path]): Raster files, in feature order.
        acs (Path | None): Zip statistics CSV.
        corpus (Path | None): Hashtag corpus.jsonl.
        hashtag_count (int | None): |H|; inferred as max key + 1 when None.
        concepts (Path | None): Concept corpus concepts.jsonl.

    Raises:
        ConfigurationError: If an enabled feature has no resource path.

    Returns:
        FeatureResources: Loaded resources.
    """
    logger = get_logger("FeaturePipeline")
    enabled = set(config.features)
    resources = FeatureResources()
    if FeatureName.MAP_PATCH in enabled:
        if not maps:
            raise ConfigurationError("map_patch enabled but `maps` is empty")
        resources.maps = [load_raster(Path(path)) for path in maps]
        if len(resources.maps) != MAP_COUNT:
            logger.warning("Using %d maps, the reference setup uses %d", len(resources.maps), MAP_COUNT)
    if FeatureName.ACS in enabled:
        if acs is None:
            raise ConfigurationError("acs enabled but `acs` path is not set")
        resources.zip_table = load_zip_table(Path(acs))
    if FeatureName.HASHTAG_CONTEXT in enabled:
        if corpus is None:
            raise ConfigurationError("hashtag_context enabled but `corpus` path is not set")
        events = list(read_corpus(Path(corpus)))
        if hashtag_count is None:
            hashtag_count = max((key for _, key, _ in events), default=-1) + 1
        if hashtag_count < 1:
            raise ConfigurationError(f"hashtag corpus {corpus} is empty and no hashtag count is configured")
        resources.hashtag_count = hashtag_count
        resources.hashtag_index = build_index(events, pool_grid, hashtag_count)
        logger.info("Hashtag index: %d events, %d hashtags", len(events), hashtag_count)
    if FeatureName.VISUAL_CONTEXT in enabled:
        if concepts is None:
            raise ConfigurationError("visual_context enabled but `concepts` path is not set")
        entries = read_concept_entries(Path(concepts))
        resources.concept_count = concept_count(entries)
        resources.concept_index = build_index(expand_concepts(entries), pool_grid, resources.concept_count)
        logger.info("Concept index: %d images, %d concepts", len(entries), resources.concept_count)
    return resources


class FeatureExtractor:
    """Runs assemble over a record list and packs the results into a FeatureDataset."""

    _logger = get_logger("FeatureExtractor")

    def __init__(self, config: ExtractionConfig, resources: FeatureResources):
        self.config = config
        self.resources = resources

    def extract(self, records: list[GeoRecord], class_count: int) -> FeatureDataset:
        """
        Extracts features of every record.

        Args:
            records (list[GeoRecord]): Records in output order.
            class_count (int): |C|, stored in the dataset manifest.

        Raises:
            GeoContextException: Extractor errors, re-raised with the failing record id.

        Returns:
            FeatureDataset: Packed features, histogram function banks and labels.
        """
        if not records:
            raise ConfigurationError("no records to extract")
        dims = feature_dims(self.config, self.resources, len(records[0].embedding))
        context_names = [name for name in dims if name.is_context]
        dense_rows: dict[FeatureName, list[np.ndarray]] = {
            name: [] for name in dims if not name.is_context and name != FeatureName.GPS_ENCODING
        }
        gps_cells = []
        bank_rows = []
        radii_count = len(self.config.radii)

        for record in records:
            try:
                bundle = assemble(record, self.config, self.resources)
            except GeoContextException as exc:
                raise type(exc)(f"record {record.id}: {exc}") from exc
            for name, rows in dense_rows.items():
                rows.append(bundle.vectors[name])
            if FeatureName.GPS_ENCODING in dims:
                gps_cells.append(int(np.flatnonzero(bundle.vectors[FeatureName.GPS_ENCODING])[0]))
            if context_names:
                bank_rows.append(np.concatenate(
                    [context_to_functions(bundle.vectors[name], radii_count) for name in context_names]
                ))

        features = {name: np.vstack(rows) for name, rows in dense_rows.items()}
        if FeatureName.GPS_ENCODING in dims:
            n = len(records)
            features[FeatureName.GPS_ENCODING] = sparse.csr_matrix(
                (np.ones(n), (np.arange(n), np.asarray(gps_cells))), shape=(n, dims[FeatureName.GPS_ENCODING])
            )

        segments, key_counts, start = {}, {}, 0
        for name in context_names:
            functions = dims[name] // radii_count
            segments[name] = (start, start + functions)
            key_counts[name] = functions // 2
            start += functions

        self._logger.info("Extracted %d records with features %s", len(records), {n.value: d for n, d in dims.items()})
        return FeatureDataset(
            ids=[record.id for record in records],
            labels=np.array([-1 if record.label is None else record.label for record in records], dtype=np.int64),
            lon=np.array([record.lon for record in records]),
            lat=np.array([record.lat for record in records]),
            class_count=class_count,
            dims=dims,
            features=features,
            knots=self.config.radii.array,
            bank_values=np.stack(bank_rows) if bank_rows else None,
            segments=segments,
            key_counts=key_counts,
        )
