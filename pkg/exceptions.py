class GeoContextException(Exception):
    """The base exception class for all derived exceptions of the geo-context pipeline."""

    code = "geo_context_error"


class OutOfBoundsError(GeoContextException):
    """A coordinate or pixel lies outside the bounding box it is resolved against."""

    code = "out_of_bounds"


class ConfigurationError(GeoContextException):
    """Invalid configuration value, missing resource or inconsistent setup."""

    code = "configuration"


class DimensionMismatchError(GeoContextException):
    """Array shapes or declared feature dimensions disagree."""

    code = "dimension_mismatch"


class KeyOutOfRangeError(GeoContextException):
    """An index key (hashtag, concept or class id) is outside its key space."""

    code = "key_out_of_range"


class EmptyInputError(GeoContextException):
    """An operation received no data where at least one item is required."""

    code = "empty_input"


class SmoothingRequiredError(GeoContextException):
    """KL divergence is infinite because Q does not cover the support of P."""

    code = "smoothing_required"


class CacheFormatError(GeoContextException):
    """A binary cache or checkpoint has a wrong magic, version or layout."""

    code = "cache_format"


class InternalError(GeoContextException):
    """An unexpected failure, wrapped so the CLI can report it in one line."""

    code = "internal"
