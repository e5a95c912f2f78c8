from enum import Enum


class FeatureName(str, Enum):
    """Feature types fed to the concatenation layer, in their fixed concatenation order."""

    IMAGE = "image"
    GPS_COORDINATES = "gps_coordinates"
    GPS_ENCODING = "gps_encoding"
    MAP_PATCH = "map_patch"
    ACS = "acs"
    HASHTAG_CONTEXT = "hashtag_context"
    VISUAL_CONTEXT = "visual_context"

    @property
    def is_context(self) -> bool:
        """True for the radius-pooled histogram features."""
        return self in (FeatureName.HASHTAG_CONTEXT, FeatureName.VISUAL_CONTEXT)

    @classmethod
    def ordered(cls, names) -> list["FeatureName"]:
        """Parses names and returns them deduplicated in canonical order."""
        wanted = {cls(name) for name in names}
        return [member for member in cls if member in wanted]


class Normalization(Enum):
    """Normalizations of radius-pooled counts."""

    ACROSS = 0
    WITHIN = 1


class PriorKind(str, Enum):
    """Location priors combined with the image classifier."""

    KNN = "knn"
    RADIUS = "radius"
