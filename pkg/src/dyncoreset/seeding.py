"""Weighted k-means++ seeding followed by a single Lloyd step."""
from dataclasses import dataclass

import numpy as np

from dyncoreset import _kernels
from dyncoreset.core import _check_centers, as_points, as_weights


@dataclass(frozen=True)
class SeedingConfig:
    k_prime: int
    rng_seed: int = 0
    lloyd_step: bool = True

    def __post_init__(self):
        if self.k_prime < 1:
            raise ValueError("k_prime must be >= 1")


def _rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def kmeanspp(X, weights=None, k_prime=1, rng=None, lloyd_step=True) -> np.ndarray:
    """Sample up to `k_prime` centers by D^2 weighting.

    The first center is drawn proportional to weight, every later one
    proportional to w(x) * cost(x, S). Sampling stops early once every
    record sits on a center. With `lloyd_step` each center is then moved to
    the weighted centroid of its cluster.

    `rng` is a numpy Generator or a seed. Exactly `k_prime` uniforms are
    consumed from it regardless of early stopping.
    """
    X = as_points(X)
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot seed an empty point set")
    if k_prime < 1:
        raise ValueError("k_prime must be >= 1")
    w = as_weights(weights, n)
    u = _rng(rng).random(k_prime)
    chosen = _kernels.seed_indices(X, w, k_prime, u)
    centers = X[chosen]
    if lloyd_step:
        centers = _kernels.lloyd_once(X, w, centers)
    return centers


def kmeanspp_config(X, weights, cfg: SeedingConfig) -> np.ndarray:
    return kmeanspp(X, weights, cfg.k_prime, np.random.default_rng(cfg.rng_seed),
                    cfg.lloyd_step)


def lloyd_step(centers, X, weights=None) -> np.ndarray:
    """One Lloyd iteration; centers of empty clusters stay where they are."""
    X = as_points(X)
    C = _check_centers(centers, X.shape[1] if X.shape[0] else None)
    if X.shape[0] == 0:
        return C.copy()
    w = as_weights(weights, X.shape[0])
    return _kernels.lloyd_once(X, w, C)


def bicriteria(X, weights=None, k=1, rng=None) -> np.ndarray:
    """2k-center k-means++ solution with a Lloyd step."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return kmeanspp(X, weights, 2 * k, rng, lloyd_step=True)
