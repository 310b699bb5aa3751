"""Fixed-height g-ary coreset tree for workloads of roughly constant size.

Points are routed to one of g**h leaves by a hash of their id. Every update
recomputes the coresets on the leaf-to-root path, i.e. h + 1 node rebuilds.
The structure never restructures itself; once the live size drifts more than
a factor 1.5 away from `n_hint` it raises RebuildRequired and the caller is
expected to call `rebuild()`.
"""
from dataclasses import dataclass

import numpy as np

from dyncoreset.core import ShapeError
from dyncoreset.coreset import ConfigError, Coreset, build_from_arrays
from dyncoreset.dyntree import PointBag

_M64 = (1 << 64) - 1


class RebuildRequired(RuntimeError):
    """The live size left the range the tree was laid out for."""


def optimal_g(n: int, s: int, h: int) -> int:
    """Arity balancing leaf work (n / g**h points) against inner work (g * s)."""
    if not (n >= s >= 1 and h >= 1):
        raise ValueError(f"need n >= s >= 1 and h >= 1, got n={n}, s={s}, h={h}")
    return max(1, round((n / s) ** (1.0 / (h + 1))))


def stable_hash(pid: int) -> int:
    # splitmix64 finalizer
    z = (pid + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


@dataclass(frozen=True)
class ShallowConfig:
    k: int
    s: int
    n_hint: int
    h: int = 1
    g: int = 0          # 0 derives the arity from n_hint, s and h
    rng_seed: int = 0
    eps_w: float = 0.0
    negative: str = "rescale"

    def __post_init__(self):
        if self.k < 1 or self.s <= self.k:
            raise ConfigError(f"need 1 <= k < s, got k={self.k}, s={self.s}")
        if self.h < 1:
            raise ConfigError("h must be >= 1")
        if self.g == 0:
            g = max(2, optimal_g(max(self.n_hint, self.s), self.s, self.h))
            object.__setattr__(self, "g", g)
        if self.g < 2:
            raise ConfigError("g must be >= 2")
        if self.n_hint < self.g ** self.h:
            raise ConfigError(f"n_hint={self.n_hint} is below the leaf count {self.g ** self.h}")

    def resized(self, n_hint: int, rederive_g: bool = True) -> "ShallowConfig":
        n_hint = max(n_hint, self.s)
        g = max(2, optimal_g(n_hint, self.s, self.h)) if rederive_g else self.g
        return ShallowConfig(self.k, self.s, max(n_hint, g ** self.h), self.h, g,
                             self.rng_seed, self.eps_w, self.negative)


class ShallowTree:
    def __init__(self, cfg: ShallowConfig, dim: int = None, derive_g: bool = True):
        self.cfg = cfg
        self.dim = dim
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.derive_g = derive_g
        self.rebuilds = 0
        self.phase_rebuilds = 0
        self.live = {}          # id -> leaf index
        self._armed = False
        self._layout()

    def _layout(self):
        cfg = self.cfg
        self.n_leaves = cfg.g ** cfg.h
        d = self.dim or 1
        self.bags = [PointBag(d) for _ in range(self.n_leaves)]
        # levels[l][j] holds the (ids, X, w) coreset of node j on level l
        self.levels = [[None] * (cfg.g ** l) for l in range(cfg.h + 1)]

    def __len__(self):
        return len(self.live)

    def __contains__(self, pid):
        return pid in self.live

    def leaf_of(self, pid: int) -> int:
        return stable_hash(int(pid)) % self.n_leaves

    def insert(self, pid, point, weight=1.0):
        pid = int(pid)
        if pid in self.live:
            raise ValueError(f"point id {pid} is already live")
        x = np.asarray(point, dtype=np.float64).reshape(-1)
        if self.dim is None:
            self.dim = x.shape[0]
            self._layout()
        if x.shape[0] != self.dim:
            raise ShapeError(f"dimension mismatch: {x.shape[0]} != {self.dim}")
        if not weight > 0:
            raise ValueError("weights must be positive")
        if len(self.live) + 1 > 1.5 * self.cfg.n_hint:
            raise RebuildRequired(f"{len(self.live) + 1} points exceed 1.5 * n_hint")
        leaf = self.leaf_of(pid)
        self.bags[leaf].add(pid, x, weight)
        self.live[pid] = leaf
        if len(self.live) >= self.cfg.n_hint / 1.5:
            self._armed = True
        self._update_path(leaf)

    def delete(self, pid):
        pid = int(pid)
        if pid not in self.live:
            raise KeyError(f"point id {pid} is not live")
        if self._armed and len(self.live) - 1 < self.cfg.n_hint / 1.5:
            raise RebuildRequired(f"{len(self.live) - 1} points fall below n_hint / 1.5")
        leaf = self.live.pop(pid)
        self.bags[leaf].remove(pid)
        self._update_path(leaf)

    def root_coreset(self) -> Coreset:
        root = self.levels[0][0]
        if root is None:
            return Coreset.empty(self.dim or 1)
        return Coreset(root[0].copy(), root[1].copy(), root[2].copy())

    def rebuild(self, n_hint: int = None):
        """Lay the tree out again for `n_hint` (default: current size) points."""
        keep = [(pid, *self.bags[leaf].get(pid)) for pid, leaf in self.live.items()]
        target = len(keep) if n_hint is None else n_hint
        self.cfg = self.cfg.resized(target, self.derive_g)
        self.live = {}
        self._armed = len(keep) >= self.cfg.n_hint / 1.5
        self._layout()
        for pid, x, w in keep:
            leaf = self.leaf_of(pid)
            self.bags[leaf].add(pid, x, w)
            self.live[pid] = leaf
        if keep:
            for j in range(self.n_leaves):
                self._build(self.cfg.h, j)
            for l in range(self.cfg.h - 1, -1, -1):
                for j in range(self.cfg.g ** l):
                    self._build(l, j)
        self.phase_rebuilds += 1

    # -- internals ----------------------------------------------------------

    def _build(self, level, j):
        cfg = self.cfg
        if level == cfg.h:
            ids, X, w = self.bags[j].view()
        else:
            kids = [c for c in self.levels[level + 1][j * cfg.g:(j + 1) * cfg.g]
                    if c is not None]
            if kids:
                ids = np.concatenate([c[0] for c in kids])
                X = np.concatenate([c[1] for c in kids])
                w = np.concatenate([c[2] for c in kids])
            else:
                ids = ()
        self.rebuilds += 1
        if len(ids) == 0:
            self.levels[level][j] = None
            return
        out = build_from_arrays(ids, X, w, cfg.k, cfg.s, self.rng, cfg.eps_w, cfg.negative)
        self.levels[level][j] = out[:3]

    def _update_path(self, leaf):
        j = leaf
        for level in range(self.cfg.h, -1, -1):
            self._build(level, j)
            j //= self.cfg.g
