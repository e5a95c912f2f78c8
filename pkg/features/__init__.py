from features.cache import FeatureDataset
from features.extractors import (
    acs_feature,
    clamp_patch,
    gps_coordinates,
    gps_encoding,
    hashtag_context,
    map_patch,
    visual_context,
)
from features.models import (
    ExtractionConfig,
    FeatureBundle,
    FeatureResources,
    RadiiSet,
    RasterMap,
    ZipTable,
)
from features.pipeline import FeatureExtractor, assemble, feature_dims, load_resources

__all__ = [
    "ExtractionConfig",
    "FeatureBundle",
    "FeatureDataset",
    "FeatureExtractor",
    "FeatureResources",
    "RadiiSet",
    "RasterMap",
    "ZipTable",
    "acs_feature",
    "assemble",
    "clamp_patch",
    "feature_dims",
    "gps_coordinates",
    "gps_encoding",
    "hashtag_context",
    "load_resources",
    "map_patch",
    "visual_context",
]
