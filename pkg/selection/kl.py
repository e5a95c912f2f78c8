from collections.abc import Iterable

import numpy as np
from scipy.special import rel_entr

from constants import SELECT_ALPHA
from exceptions import ConfigurationError, DimensionMismatchError, EmptyInputError, SmoothingRequiredError
from geodata.grid import inside_bbox, quantize_many
from geodata.models import GeoPoint, GridSpec
from selection.models import ClassDivergence, GeoDistribution
from utils.log import get_logger

_logger = get_logger("Selection")


def _coordinates(points) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(points, tuple) and len(points) == 2 and isinstance(points[0], np.ndarray):
        return np.asarray(points[0], dtype=np.float64), np.asarray(points[1], dtype=np.float64)
    points = list(points)
    return (
        np.array([p.lon for p in points], dtype=np.float64),
        np.array([p.lat for p in points], dtype=np.float64),
    )


def estimate_distribution(
    points: Iterable[GeoPoint] | tuple[np.ndarray, np.ndarray], grid: GridSpec, alpha: float = 0.0
) -> GeoDistribution:
    """
    Geospatial distribution of a point set: (count + alpha) / (N + alpha * cells).

    Args:
        points: GeoPoints, or a (lon, lat) pair of arrays. Points outside the grid
            bbox are skipped with a warning.
        grid (GridSpec): Selection grid.
        alpha (float, optional): Additive smoothing. Defaults to 0.

    Raises:
        EmptyInputError: If no point lies in the bbox and alpha is 0.

    Returns:
        GeoDistribution: Distribution over the grid cells.
    """
    if alpha < 0:
        raise ConfigurationError(f"alpha must be >= 0, got {alpha}")
    lon, lat = _coordinates(points)
    inside = inside_bbox(lon, lat, grid)
    if not inside.all():
        _logger.warning("Skipped %d points outside the selection grid", int((~inside).sum()))
    n = int(inside.sum())
    if n == 0 and alpha == 0:
        raise EmptyInputError("no points to estimate a distribution from, use alpha > 0")
    _, _, flat = quantize_many(lon[inside], lat[inside], grid)
    counts = np.bincount(flat, minlength=grid.cell_count).astype(np.float64)
    return GeoDistribution(grid, (counts + alpha) / (n + alpha * grid.cell_count))


def kl_divergence(p: GeoDistribution, q: GeoDistribution) -> float:
    """
    D_KL(P || Q) = sum_i P(i) ln(P(i) / Q(i)) in nats; cells with P(i) = 0 add nothing.

    Raises:
        DimensionMismatchError: If the grids differ.
        SmoothingRequiredError: If Q(i) = 0 where P(i) > 0.
    """
    if p.grid != q.grid:
        raise DimensionMismatchError("distributions are on different grids")
    support = p.probs > 0
    if np.any(q.probs[support] == 0):
        uncovered = int(np.flatnonzero(support & (q.probs == 0))[0])
        raise SmoothingRequiredError(f"Q is 0 in cell {uncovered} where P > 0; estimate Q with alpha > 0")
    return max(float(rel_entr(p.probs, q.probs).sum()), 0.0)


def select_classes(
    p: GeoDistribution,
    q_by_class: dict[int, GeoDistribution],
    top_n: int | None = None,
    threshold: float | None = None,
) -> list[ClassDivergence]:
    """
    Ranks classes by how far their distribution is from the overall one.

    Args:
        p (GeoDistribution): Distribution of all images.
        q_by_class (dict[int, GeoDistribution]): Distribution of each class.
        top_n (int | None, optional): Keep the first n classes.
        threshold (float | None, optional): Keep classes with D_KL above it instead.

    Raises:
        SmoothingRequiredError: Naming the class whose Q does not cover P.

    Returns:
        list[ClassDivergence]: Descending by D_KL, ties by class id ascending.
    """
    scored = []
    for class_id in sorted(q_by_class):
        try:
            scored.append((class_id, kl_divergence(p, q_by_class[class_id])))
        except (SmoothingRequiredError, DimensionMismatchError) as exc:
            raise type(exc)(f"class {class_id}: {exc}") from exc
    scored.sort(key=lambda item: (-item[1], item[0]))
    if threshold is not None:
        scored = [item for item in scored if item[1] > threshold]
    if top_n is not None:
        scored = scored[:top_n]
    return [ClassDivergence(class_id, kl, rank) for rank, (class_id, kl) in enumerate(scored, start=1)]


def class_distributions(
    events: Iterable[tuple[GeoPoint, int, float]], grid: GridSpec, alpha: float = SELECT_ALPHA
) -> tuple[GeoDistribution, dict[int, GeoDistribution]]:
    """
    P of all events (unsmoothed) and a smoothed Q per key from a tagged corpus.

    Returns:
        tuple[GeoDistribution, dict[int, GeoDistribution]]: P and Q by class id.
    """
    lon, lat, keys = [], [], []
    for point, key, _ in events:
        lon.append(point.lon)
        lat.append(point.lat)
        keys.append(key)
    if not keys:
        raise EmptyInputError("corpus has no events")
    lon, lat, keys = np.asarray(lon), np.asarray(lat), np.asarray(keys)
    p = estimate_distribution((lon, lat), grid)
    q_by_class = {
        int(key): estimate_distribution((lon[keys == key], lat[keys == key]), grid, alpha)
        for key in np.unique(keys)
    }
    return p, q_by_class
