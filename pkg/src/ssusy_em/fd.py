"""Fourth-order finite differences and quadrature on uniform grids.

Derivatives of analytically known quantities (mass, superpotential) are
evaluated in closed form elsewhere; these stencils exist to apply
differential operators to arbitrary sampled functions and to measure
residuals.  Edge rows use one-sided stencils of matching order so that
convergence tests see a uniform rate.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .domain import GridTooSmall

# Residual checks discard this many points at each end, where the
# one-sided rows amplify roundoff on rough integrands.
INTERIOR_TRIM = 10


def d1(values: np.ndarray, h: float) -> np.ndarray:
    """First derivative, O(h^4), with one-sided rows at both ends."""
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n < 5:
        raise GridTooSmall(f"d1 needs at least 5 points, got {n}")
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    out[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * h)
    out[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3] + 6.0 * v[-4] - v[-5]) / (12.0 * h)
    return out


def d2(values: np.ndarray, h: float) -> np.ndarray:
    """Second derivative, O(h^4) interior, one-sided rows at both ends.

    The edge rows need six points; on a five-point grid they fall back to
    five-point rows that are still exact through quartics.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[0]
    if n < 5:
        raise GridTooSmall(f"d2 needs at least 5 points, got {n}")
    h2 = 12.0 * h * h
    out = np.empty_like(v)
    out[2:-2] = (-v[:-4] + 16.0 * v[1:-3] - 30.0 * v[2:-2] + 16.0 * v[3:-1] - v[4:]) / h2
    if n >= 6:
        out[0] = (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]) / h2
        out[1] = (10.0 * v[0] - 15.0 * v[1] - 4.0 * v[2] + 14.0 * v[3] - 6.0 * v[4] + v[5]) / h2
        out[-1] = (45.0 * v[-1] - 154.0 * v[-2] + 214.0 * v[-3] - 156.0 * v[-4] + 61.0 * v[-5] - 10.0 * v[-6]) / h2
        out[-2] = (10.0 * v[-1] - 15.0 * v[-2] - 4.0 * v[-3] + 14.0 * v[-4] - 6.0 * v[-5] + v[-6]) / h2
    else:
        out[0] = (35.0 * v[0] - 104.0 * v[1] + 114.0 * v[2] - 56.0 * v[3] + 11.0 * v[4]) / h2
        out[1] = (11.0 * v[0] - 20.0 * v[1] + 6.0 * v[2] + 4.0 * v[3] - v[4]) / h2
        out[-1] = (35.0 * v[-1] - 104.0 * v[-2] + 114.0 * v[-3] - 56.0 * v[-4] + 11.0 * v[-5]) / h2
        out[-2] = (11.0 * v[-1] - 20.0 * v[-2] + 6.0 * v[-3] + 4.0 * v[-4] - v[-5]) / h2
    return out


def antiderivative(values: np.ndarray, h: float, anchor: int = 0) -> np.ndarray:
    """Cumulative trapezoid integral vanishing at index ``anchor``."""
    v = np.asarray(values, dtype=float)
    out = cumulative_trapezoid(v, dx=h, initial=0.0)
    if anchor:
        out = out - out[anchor]
    return out


def integral(values: np.ndarray, h: float) -> float:
    return float(trapezoid(np.asarray(values, dtype=float), dx=h))


def l2_norm(values: np.ndarray, h: float) -> float:
    v = np.asarray(values, dtype=float)
    return float(np.sqrt(h * np.sum(v * v)))


def inner(u: np.ndarray, v: np.ndarray, h: float) -> float:
    return float(h * np.sum(np.asarray(u, dtype=float) * np.asarray(v, dtype=float)))


def interior_slice(n: int, trim: int = INTERIOR_TRIM) -> slice:
    """Slice keeping the interior of an n-point grid, never empty."""
    t = min(trim, (n - 1) // 2)
    return slice(t, n - t)


def rel_residual(numer: np.ndarray, denom: np.ndarray, h: float, trim: int = INTERIOR_TRIM) -> float:
    """Interior L2 norm of ``numer`` relative to that of ``denom``."""
    sl = interior_slice(np.asarray(numer).shape[0], trim)
    scale = l2_norm(np.asarray(denom)[sl], h)
    if scale == 0.0:
        return float("inf")
    return l2_norm(np.asarray(numer)[sl], h) / scale
