"""Static sensitivity-sampling coresets."""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from dyncoreset import _kernels
from dyncoreset.core import CENTER_ID, ShapeError, as_points, as_weights
from dyncoreset.seeding import _rng


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CoresetConfig:
    k: int
    s: int
    eps_w: float = 0.0
    rng_seed: int = 0
    negative: str = "rescale"   # or "clamp"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.negative not in ("rescale", "clamp"):
            raise ConfigError(f"unknown negative-weight policy {self.negative!r}")
        if self.s <= self.k:
            raise ConfigError(f"coreset size s={self.s} must exceed k={self.k}")
        if self.eps_w < 0:
            raise ConfigError("eps_w must be >= 0")


@dataclass
class Coreset:
    ids: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    clamped_mass: float = 0.0

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64).reshape(-1)
        self.weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2:
            self.points = self.points.reshape(len(self.ids), -1)
        if not (len(self.ids) == len(self.weights) == self.points.shape[0]):
            raise ShapeError("ids, points and weights differ in length")

    def __len__(self):
        return len(self.ids)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def empty(cls, d: int) -> "Coreset":
        return cls(np.zeros(0, np.int64), np.zeros((0, d)), np.zeros(0))

    @classmethod
    def from_points(cls, X, weights=None, ids=None) -> "Coreset":
        X = as_points(X)
        w = as_weights(weights, X.shape[0])
        if ids is None:
            ids = np.arange(X.shape[0])
        return cls(np.array(ids, dtype=np.int64), X.copy(), w.copy())


def merge(c1: Coreset, c2: Coreset) -> Coreset:
    """Multiset union of two coresets."""
    if len(c1) and len(c2) and c1.dim != c2.dim:
        raise ShapeError(f"dimension mismatch: {c1.dim} != {c2.dim}")
    return Coreset(
        np.concatenate([c1.ids, c2.ids]),
        np.concatenate([c1.points, c2.points]) if len(c1) or len(c2)
        else c1.points.copy(),
        np.concatenate([c1.weights, c2.weights]),
        c1.clamped_mass + c2.clamped_mass,
    )


class SensitivityDraw(NamedTuple):
    labels: np.ndarray          # bicriteria cluster of every input record
    cluster_mass: np.ndarray    # w(S_c) per center
    total_cost: float
    picks: np.ndarray           # indices into the input, with repetition
    pick_weights: np.ndarray
    center_weights: np.ndarray  # before clamping; may be negative


def sensitivity_sample(X, weights, centers, k, s, rng=None, eps_w=0.0) -> SensitivityDraw:
    """Draw `s` records proportional to sensitivity w.r.t. `centers`.

    sens(x) = w(x) cost(x,S) / cost_w(X,S) + w(x) / w(S_x); a draw of x gets
    weight w(x) * sum(sens) / ((s - k) * sens(x)), and center c gets
    (1 + eps_w) * w(S_c) minus the sampled weight that landed in its cluster.
    """
    X = as_points(X)
    w = as_weights(weights, X.shape[0])
    C = as_points(centers, X.shape[1])
    u = _rng(rng).random(s)
    return SensitivityDraw(*_kernels.sensitivity_draw(X, w, C, u, float(s - k), float(eps_w)))


def _aggregate_distinct(ids, X, w):
    _, first, inverse = np.unique(X, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.sort(first)
    # renumber groups by first appearance so output order follows input order
    rank = np.empty(len(first), np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    agg = np.bincount(rank[inverse], weights=w, minlength=len(first))
    return ids[order], X[order], agg


def build_from_arrays(ids, X, w, k, s, rng, eps_w=0.0, negative="rescale"):
    """Array-level core of build_coreset; returns (ids, X, w, clamped_mass).

    Skips input validation; the dynamic structures call this in their hot path.
    """
    n = X.shape[0]
    if n <= s:
        return ids.copy(), X.copy(), w.copy(), 0.0
    u_seed = rng.random(2 * k)
    u_draw = rng.random(s)
    chosen = _kernels.seed_indices(X, w, 2 * k, u_seed)
    centers = _kernels.lloyd_once(X, w, X[chosen])
    labels, mass, cost, picks, pw, cw = _kernels.sensitivity_draw(
        X, w, centers, u_draw, float(s - k), float(eps_w))
    if not cost > 0.0:
        a, b, c = _aggregate_distinct(ids, X, w)
        return a, b, c, 0.0
    neg = cw < 0.0
    clamped = float(-cw[neg].sum())
    if clamped > 0.0:
        if negative == "rescale":
            target = (1.0 + eps_w) * mass
            landed = target - cw
            factor = np.where(neg, target / np.where(neg, landed, 1.0), 1.0)
            pw = pw * factor[labels[picks]]
        cw = np.where(neg, 0.0, cw)
    keep = cw > 0.0
    out_ids = np.concatenate([ids[picks], np.full(int(keep.sum()), CENTER_ID, np.int64)])
    out_X = np.concatenate([X[picks], centers[keep]])
    out_w = np.concatenate([pw, cw[keep]])
    return out_ids, out_X, out_w, clamped


def build_coreset(X, weights=None, cfg: CoresetConfig = None, ids=None, rng=None) -> Coreset:
    """Sensitivity-sampling coreset of at most s + 2k weighted records.

    Inputs of at most `cfg.s` records are returned unchanged. Otherwise a
    2k-center bicriteria solution drives `cfg.s` independent draws; the
    bicriteria centers are appended with the residual cluster mass.

    A center whose residual is negative (its cluster was oversampled) gets
    weight 0 and the magnitude is summed into `clamped_mass`. Under the
    default "rescale" policy the sampled weights of that cluster are scaled
    down to the cluster mass, so the total weight stays (1 + eps_w) * W;
    under "clamp" the excess is kept. Centers of weight 0 are dropped.
    """
    if cfg is None:
        raise ConfigError("a CoresetConfig is required")
    X = as_points(X)
    n = X.shape[0]
    if n == 0:
        raise ValueError("cannot build a coreset of an empty point set")
    w = as_weights(weights, n)
    ids = np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, dtype=np.int64)
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)
    out = build_from_arrays(ids, X, w, cfg.k, cfg.s, _rng(rng), cfg.eps_w, cfg.negative)
    return Coreset(*out)
