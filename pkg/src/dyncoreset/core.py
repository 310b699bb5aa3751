"""Weighted Euclidean point sets and the k-means cost."""
from typing import NamedTuple

import numpy as np

from dyncoreset import _kernels

# id carried by coreset records that are bicriteria centers, not input points
CENTER_ID = -1


class ShapeError(ValueError):
    """Inputs disagree on dimension or are not 2-d / 1-d as required."""


class WeightedPoint(NamedTuple):
    id: int
    point: np.ndarray
    weight: float = 1.0


def as_points(X, d=None) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, d or 0)
    if X.ndim != 2:
        raise ShapeError(f"expected a 2-d array of points, got shape {X.shape}")
    if d is not None and X.shape[0] and X.shape[1] != d:
        raise ShapeError(f"dimension mismatch: {X.shape[1]} != {d}")
    if not np.all(np.isfinite(X)):
        raise ValueError("coordinates must be finite")
    return X


def as_weights(w, n: int) -> np.ndarray:
    if w is None:
        return np.ones(n)
    w = np.ascontiguousarray(w, dtype=np.float64).reshape(-1)
    if w.shape[0] != n:
        raise ShapeError(f"{w.shape[0]} weights for {n} points")
    return w


def _check_centers(centers, d):
    C = as_points(centers)
    if C.shape[0] == 0:
        raise ValueError("solution must contain at least one center")
    if d is not None and C.shape[1] != d:
        raise ShapeError(f"center dimension {C.shape[1]} != point dimension {d}")
    return C


def dist2(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"dimension mismatch: {a.shape[0]} != {b.shape[0]}")
    diff = a - b
    return float(diff @ diff)


def cost(centers, X, weights=None) -> float:
    """Weighted sum over X of the squared distance to the nearest center."""
    X = as_points(X)
    C = _check_centers(centers, X.shape[1] if X.shape[0] else None)
    if X.shape[0] == 0:
        return 0.0
    w = as_weights(weights, X.shape[0])
    return float(_kernels.weighted_cost(X, w, C))


def assign(centers, X) -> np.ndarray:
    """Index of the nearest center for each row of X; ties go to the lowest index."""
    X = as_points(X)
    C = _check_centers(centers, X.shape[1] if X.shape[0] else None)
    if X.shape[0] == 0:
        return np.zeros(0, np.int64)
    idx, _ = _kernels.nearest(X, C)
    return idx


def point_costs(centers, X) -> np.ndarray:
    """Unweighted squared distance of each row of X to its nearest center."""
    X = as_points(X)
    C = _check_centers(centers, X.shape[1] if X.shape[0] else None)
    if X.shape[0] == 0:
        return np.zeros(0)
    _, d2 = _kernels.nearest(X, C)
    return d2
