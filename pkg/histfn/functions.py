import numpy as np

from exceptions import DimensionMismatchError


def _locate(knots: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment index and interpolation weight of rho, clamped to the knot range."""
    clamped = np.clip(rho, knots[0], knots[-1])
    idx = np.clip(np.searchsorted(knots, clamped, side="right") - 1, 0, knots.size - 2)
    t = (clamped - knots[idx]) / (knots[idx + 1] - knots[idx])
    return idx, t


def _slope_index(knots: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Segment whose slope is the derivative at rho, and the mask of rho inside [knots[0], knots[-1]]."""
    inside = (rho >= knots[0]) & (rho <= knots[-1])
    idx = np.clip(np.searchsorted(knots, rho, side="right") - 1, 0, knots.size - 2)
    return idx, inside


def interpolate(knots: np.ndarray, values: np.ndarray, rho) -> np.ndarray:
    """
    Piecewise-linear interpolation of one function, flat extension outside the knots.

    Args:
        knots (np.ndarray): Strictly increasing radii.
        values (np.ndarray): Function values at the knots.
        rho: Scalar or array of radii.

    Returns:
        np.ndarray: Interpolated values with the shape of rho.
    """
    idx, t = _locate(knots, np.asarray(rho, dtype=np.float64))
    return values[idx] * (1.0 - t) + values[idx + 1] * t


def slope(knots: np.ndarray, values: np.ndarray, rho) -> np.ndarray:
    """
    Derivative of the interpolant: slope of the segment to the right of rho, the last
    segment at the last knot, and 0 outside the knot range.
    """
    rho = np.asarray(rho, dtype=np.float64)
    idx, inside = _slope_index(knots, rho)
    segment_slope = (values[idx + 1] - values[idx]) / (knots[idx + 1] - knots[idx])
    return np.where(inside, segment_slope, 0.0)


def bank_eval(knots: np.ndarray, values: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """
    Evaluates a batch of function banks at per-function radii.

    Args:
        knots (np.ndarray): Shared knots, shape (R,).
        values (np.ndarray): Function values, shape (B, F, R).
        rho (np.ndarray): Radii, shape (F, K).

    Returns:
        np.ndarray: Shape (B, F, K); entry [b, f, k] = H_{b,f}(rho[f, k]).
    """
    _check_bank_shapes(knots, values, rho)
    idx, t = _locate(knots, rho)
    rows = np.arange(rho.shape[0])[:, None]
    lower = values[:, rows, idx]
    upper = values[:, rows, idx + 1]
    return lower * (1.0 - t) + upper * t


def bank_deriv(knots: np.ndarray, values: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """
    Derivatives dH_{b,f}/drho at rho[f, k], shape (B, F, K). Same conventions as slope.
    """
    _check_bank_shapes(knots, values, rho)
    idx, inside = _slope_index(knots, rho)
    rows = np.arange(rho.shape[0])[:, None]
    width = knots[idx + 1] - knots[idx]
    slopes = (values[:, rows, idx + 1] - values[:, rows, idx]) / width
    return np.where(inside, slopes, 0.0)


def _check_bank_shapes(knots: np.ndarray, values: np.ndarray, rho: np.ndarray) -> None:
    if values.ndim != 3 or values.shape[2] != knots.size:
        raise DimensionMismatchError(f"bank values must be (batch, functions, {knots.size}), got {values.shape}")
    if rho.ndim != 2 or rho.shape[0] != values.shape[1]:
        raise DimensionMismatchError(f"radius parameters {rho.shape} do not match {values.shape[1]} functions")


def context_to_functions(context: np.ndarray, radii_count: int) -> np.ndarray:
    """
    Rearranges flat radius-major context features into per-function value rows.

    Args:
        context (np.ndarray): Shape (..., R * F), laid out radius-major.
        radii_count (int): R.

    Returns:
        np.ndarray: Shape (..., F, R); row f holds function f at every radius.
    """
    if context.shape[-1] % radii_count:
        raise DimensionMismatchError(f"context width {context.shape[-1]} is not a multiple of {radii_count} radii")
    functions = context.shape[-1] // radii_count
    return np.swapaxes(context.reshape(*context.shape[:-1], radii_count, functions), -1, -2)


def functions_to_context(values: np.ndarray) -> np.ndarray:
    """Inverse of context_to_functions."""
    return np.swapaxes(values, -1, -2).reshape(*values.shape[:-2], -1)
