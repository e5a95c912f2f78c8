import numpy as np

from baselines.models import ClassDistribution, LabeledPoints
from constants import PRIOR_EPSILON
from exceptions import ConfigurationError, DimensionMismatchError
from geodata.grid import haversine_many
from geodata.models import GeoPoint
from geodata.spatial_index import SpatialIndex
from utils.log import get_logger

_logger = get_logger("Priors")


def knn_prior(
    train: LabeledPoints | list[tuple[GeoPoint, int]],
    query: GeoPoint,
    k: int,
    epsilon: float = PRIOR_EPSILON,
    class_count: int | None = None,
) -> ClassDistribution:
    """
    Location prior from the labels of the k nearest training points.

    Args:
        train (LabeledPoints | list[tuple[GeoPoint, int]]): Labeled training coordinates.
        query (GeoPoint): Query coordinate.
        k (int): Neighbor count. Larger than the training set means all of it.
        epsilon (float, optional): Additive smoothing. Defaults to PRIOR_EPSILON.
        class_count (int | None, optional): |C|. Defaults to max label + 1.

    Raises:
        ConfigurationError: If k < 1 or epsilon < 0.

    Returns:
        ClassDistribution: (count_c + epsilon) / (k + epsilon * |C|); neighbors
            ordered by haversine distance, ties by training index.
    """
    if not isinstance(train, LabeledPoints):
        train = LabeledPoints.from_pairs(train)
    if k < 1:
        raise ConfigurationError(f"k must be >= 1, got {k}")
    if epsilon < 0:
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon}")
    if class_count is None:
        class_count = int(train.labels.max()) + 1
    if k > len(train):
        _logger.warning("k=%d exceeds the %d training points, using all of them", k, len(train))
        k = len(train)
    distances = haversine_many(query.lon, query.lat, train.lon, train.lat)
    nearest = np.argsort(distances, kind="stable")[:k]
    counts = np.bincount(train.labels[nearest], minlength=class_count).astype(np.float64)
    if counts.size > class_count:
        raise DimensionMismatchError(f"training label {counts.size - 1} outside {class_count} classes")
    return ClassDistribution((counts + epsilon) / (k + epsilon * class_count))


def radius_prior(point: GeoPoint, index: SpatialIndex, r: float, epsilon: float = PRIOR_EPSILON) -> ClassDistribution:
    """
    Location prior from the across-key normalized histogram at radius r.

    Args:
        point (GeoPoint): Query coordinate.
        index (SpatialIndex): Index keyed by class id.
        r (float): Radius in meters, any positive value.
        epsilon (float, optional): Additive smoothing. Defaults to PRIOR_EPSILON.

    Returns:
        ClassDistribution: (a_c + epsilon) / (1 + epsilon * |C|), uniform when nothing
            lies within r.
    """
    if epsilon < 0:
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon}")
    aggregate = index.radius_aggregate(point, r)
    total = aggregate.sum()
    if total <= 0:
        return ClassDistribution.uniform(index.key_space)
    return ClassDistribution((aggregate / total + epsilon) / (1.0 + epsilon * index.key_space))


def combine_scores(p_image: np.ndarray, prior: np.ndarray, p_class: np.ndarray) -> np.ndarray:
    """
    Vectorized bayes_combine over rows: p_image * prior / p_class, renormalized per row.
    Rows whose product is all zero become uniform.
    """
    p_image = np.atleast_2d(np.asarray(p_image, dtype=np.float64))
    prior = np.atleast_2d(np.asarray(prior, dtype=np.float64))
    p_class = np.asarray(p_class, dtype=np.float64)
    if p_image.shape != prior.shape or p_class.shape != (p_image.shape[1],):
        raise DimensionMismatchError(f"shapes {p_image.shape}, {prior.shape}, {p_class.shape} do not match")
    if np.any(p_class <= 0):
        raise ConfigurationError(f"class {int(np.argmin(p_class))} has prior probability 0")
    scores = p_image * prior / p_class
    totals = scores.sum(axis=1, keepdims=True)
    uniform = np.full_like(scores, 1.0 / scores.shape[1])
    return np.divide(scores, totals, out=uniform, where=totals > 0)


def bayes_combine(p_image: ClassDistribution, prior: ClassDistribution, p_class: ClassDistribution) -> ClassDistribution:
    """
    Combines the image classifier with a location prior:
    score_c = p_image(c) * prior(c) / p_class(c), renormalized.

    Raises:
        DimensionMismatchError: If the class counts differ.
        ConfigurationError: If p_class has a zero entry.
    """
    return ClassDistribution(combine_scores(p_image.probs, prior.probs, p_class.probs)[0])


def knn_priors(train: LabeledPoints, lon: np.ndarray, lat: np.ndarray, k: int, epsilon: float, class_count: int) -> np.ndarray:
    """kNN priors of many query points, shape (n, class_count)."""
    return np.vstack([
        knn_prior(train, GeoPoint(float(x), float(y)), k, epsilon, class_count).probs for x, y in zip(lon, lat)
    ])


def radius_priors(index: SpatialIndex, lon: np.ndarray, lat: np.ndarray, r: float, epsilon: float) -> np.ndarray:
    """Radius priors of many query points, shape (n, key_space)."""
    return np.vstack([radius_prior(GeoPoint(float(x), float(y)), index, r, epsilon).probs for x, y in zip(lon, lat)])
