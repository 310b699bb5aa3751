"""Fully dynamic coreset maintenance on a balanced merge-and-reduce tree.

Leaves hold between s/2 and s raw points, except a single special leaf that
takes every insertion. Each inner node keeps a size-s coreset of the union of
its children's coresets. Two optional accelerations are layered on top:

* insertion epochs: an inner node keeps its last computed coreset plus a
  verbatim buffer of the points inserted below it since then, and only
  recomputes once the buffer holds s points;
* lazy deletes: a deleted point that does not appear in the root coreset is
  only marked, until the number of marked points reaches ceil(delta * n).
"""
import math
from dataclasses import dataclass

import numpy as np

from dyncoreset.core import ShapeError
from dyncoreset.coreset import ConfigError, Coreset, build_from_arrays


@dataclass(frozen=True)
class DynTreeConfig:
    k: int
    s: int
    delta: float = 0.0
    insertion_epochs: bool = False
    lazy_deletes: bool = False
    rng_seed: int = 0
    eps_w: float = 0.0
    negative: str = "rescale"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.negative not in ("rescale", "clamp"):
            raise ConfigError(f"unknown negative-weight policy {self.negative!r}")
        if self.s <= self.k or self.s < 2:
            raise ConfigError(f"s={self.s} must exceed k={self.k} and be >= 2")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")


@dataclass
class TreeStats:
    rebuilds: int = 0         # node coresets recomputed
    epoch_starts: int = 0     # recomputations triggered by a full insert buffer
    phase_rebuilds: int = 0
    flushes: int = 0          # deletions that recomputed the tree
    marks: int = 0            # deletions answered by marking only
    purged: int = 0           # marked records dropped during insertion rebuilds
    clamped_mass: float = 0.0
    dropped_mass: float = 0.0

    def as_dict(self):
        return dict(self.__dict__)


class PointBag:
    """Growable (id, point, weight) storage with O(1) removal by id."""

    __slots__ = ("ids", "X", "w", "n", "slot")

    def __init__(self, d, cap=8):
        self.ids = np.empty(cap, np.int64)
        self.X = np.empty((cap, d))
        self.w = np.empty(cap)
        self.n = 0
        self.slot = {}

    def add(self, pid, x, w):
        n = self.n
        if n == len(self.ids):
            cap = 2 * n
            self.ids = np.resize(self.ids, cap)
            X = np.empty((cap, self.X.shape[1]))
            X[:n] = self.X
            self.X = X
            self.w = np.resize(self.w, cap)
        self.ids[n] = pid
        self.X[n] = x
        self.w[n] = w
        self.slot[pid] = n
        self.n = n + 1

    def remove(self, pid):
        i = self.slot.pop(pid)
        last = self.n - 1
        x, w = self.X[i].copy(), float(self.w[i])
        if i != last:
            moved = int(self.ids[last])
            self.ids[i] = moved
            self.X[i] = self.X[last]
            self.w[i] = self.w[last]
            self.slot[moved] = i
        self.n = last
        return x, w

    def get(self, pid):
        i = self.slot[pid]
        return self.X[i], float(self.w[i])

    def view(self):
        n = self.n
        return self.ids[:n], self.X[:n], self.w[:n]

    def __len__(self):
        return self.n


class _Node:
    __slots__ = ("parent", "left", "right", "bag",
                 "ids", "X", "w", "excess", "clamped",
                 "bids", "bX", "bw", "bn")

    def __init__(self, parent=None, bag=None):
        self.parent = parent
        self.left = self.right = None
        self.bag = bag
        self.ids = self.X = self.w = None
        self.excess = 0.0   # coreset weight minus represented weight
        self.clamped = 0.0
        self.bids = self.bX = self.bw = None
        self.bn = 0

    @property
    def is_leaf(self):
        return self.bag is not None


def _depth(v):
    d = 0
    while v.parent is not None:
        v = v.parent
        d += 1
    return d


class DynTree:
    """Dynamic coreset over a stream of weighted insertions and deletions.

    Point ids must be non-negative integers; -1 marks bicriteria centers in
    reported coresets.
    """

    def __init__(self, cfg: DynTreeConfig, dim: int = None):
        self.cfg = cfg
        self.dim = dim
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.stats = TreeStats()
        self.live = {}          # id -> leaf node holding it
        self.marked = {}        # ordered set of ids marked for removal
        self._marked_arr = None
        self.phase_start_size = cfg.s
        self.root = self.special = None
        if dim is not None:
            self._reset_tree()

    # -- public API ---------------------------------------------------------

    def __len__(self):
        return len(self.live) - len(self.marked)

    def __contains__(self, pid):
        return pid in self.live and pid not in self.marked

    def insert(self, pid, point, weight=1.0):
        pid = int(pid)
        if pid < 0:
            raise ValueError("point ids must be non-negative")
        if pid in self.live:
            raise ValueError(f"point id {pid} is already live")
        x = np.asarray(point, dtype=np.float64).reshape(-1)
        if self.dim is None:
            self.dim = x.shape[0]
            self._reset_tree()
        if x.shape[0] != self.dim:
            raise ShapeError(f"dimension mismatch: {x.shape[0]} != {self.dim}")
        if not np.isfinite(x).all():
            raise ValueError("coordinates must be finite")
        if not weight > 0:
            raise ValueError("weights must be positive")
        s = self.cfg.s
        leaf = self.special
        leaf.bag.add(pid, x, weight)
        self.live[pid] = leaf
        if self.cfg.insertion_epochs:
            trigger = None
            v = leaf.parent
            while v is not None:
                self._append_buffer(v, pid, x, weight)
                if trigger is None and v.bn >= s:
                    trigger = v
                v = v.parent
            if trigger is not None:
                self.stats.epoch_starts += 1
                self._rebuild_upward(trigger, drop_marked=True)
        else:
            self._rebuild_upward(leaf.parent, drop_marked=True)
        if leaf.bag.n >= s:
            self._promote_special()
        self._check_phase()

    def delete(self, pid):
        pid = int(pid)
        if pid not in self.live:
            raise KeyError(f"point id {pid} is not live")
        if pid in self.marked:
            return
        cfg = self.cfg
        victims = [pid]
        if cfg.lazy_deletes and cfg.delta > 0.0:
            threshold = math.ceil(cfg.delta * len(self.live) - 1e-9)
            if len(self.marked) < threshold and not self._in_root(pid):
                self.marked[pid] = None
                self._marked_arr = None
                self.stats.marks += 1
                self._check_phase()
                return
            victims.extend(self.marked)
            self.marked.clear()
            self._marked_arr = None
        self.stats.flushes += 1
        self._remove_points(victims)
        self._check_phase()

    def root_coreset(self) -> Coreset:
        """Current coreset of the live points; marked points never appear."""
        if self.root is None:
            return Coreset.empty(self.dim or 0)
        ids, X, w = self._maintained(self.root)
        if self.marked:
            keep = ~np.isin(ids, self._marked_ids())
            ids, X, w = ids[keep], X[keep], w[keep]
        return Coreset(ids.copy(), X.copy(), w.copy(), max(self.root.clamped, 0.0))

    def start_phase(self):
        """Rebuild the whole tree from the live, unmarked points."""
        for pid in self.marked:
            leaf = self.live.pop(pid)
            leaf.bag.remove(pid)
        self.marked.clear()
        self._marked_arr = None
        if self.dim is None:
            return
        n = len(self.live)
        ids = np.empty(n, np.int64)
        X = np.empty((n, self.dim))
        w = np.empty(n)
        for i, (pid, leaf) in enumerate(self.live.items()):
            ids[i] = pid
            X[i], w[i] = leaf.bag.get(pid)
        s = self.cfg.s
        full = n - n % s
        leaves = []
        self.live = {}
        for lo in range(0, n + 1, s):
            hi = min(lo + s, n)
            if lo == full and hi - lo < s:
                leaf = self.special = self._make_leaf(ids[lo:hi], X[lo:hi], w[lo:hi])
            else:
                leaf = self._make_leaf(ids[lo:hi], X[lo:hi], w[lo:hi])
            leaves.append(leaf)
            for pid in ids[lo:hi]:
                self.live[int(pid)] = leaf
        self.root = self._assemble(leaves, None)
        self._rebuild_all(self.root)
        self.phase_start_size = max(n, s)
        self.stats.phase_rebuilds += 1

    def leaves(self):
        out = []
        stack = [(self.root, 0)] if self.root is not None else []
        while stack:
            v, d = stack.pop()
            if v.is_leaf:
                out.append((v, d))
            else:
                stack.append((v.right, d + 1))
                stack.append((v.left, d + 1))
        return out

    def height(self):
        return max((d for _, d in self.leaves()), default=0)

    def audit(self):
        """Check every structural invariant; raise AssertionError on failure."""
        cfg = self.cfg
        s = cfg.s
        if self.root is None:
            assert not self.live
            return {}
        assert self.root.parent is None
        leaves = self.leaves()
        depths = [d for _, d in leaves]
        assert max(depths) - min(depths) <= 1, f"unbalanced leaf depths {min(depths)}..{max(depths)}"
        specials = [v for v, _ in leaves if v is self.special]
        assert len(specials) == 1, "special leaf missing from tree"
        total = 0
        for v, _ in leaves:
            n = v.bag.n
            total += n
            if v is self.special:
                assert n < s, f"special leaf holds {n} >= s points"
            else:
                assert s / 2 < n <= s, f"leaf holds {n} points, outside (s/2, s]"
            for pid in v.bag.ids[:n]:
                assert self.live.get(int(pid)) is v, f"id {pid} not mapped to its leaf"
        assert total == len(self.live), "live map and leaves disagree"
        assert all(pid in self.live for pid in self.marked)

        def walk(v):
            if v.is_leaf:
                return float(v.bag.w[:v.bag.n].sum())
            assert v.left.parent is v and v.right.parent is v, "broken parent link"
            mass = walk(v.left) + walk(v.right)
            if cfg.insertion_epochs:
                assert v.bn < s, "insert buffer reached s at rest"
            else:
                assert v.bn == 0
            _, _, w = self._maintained(v)
            held = float(w.sum())
            assert abs(held - (mass + v.excess)) <= 1e-9 * max(1.0, mass, held), \
                f"node weight {held} != represented {mass} + excess {v.excess}"
            return mass

        mass = walk(self.root)
        core = self.root_coreset()
        if self.marked and len(core):
            assert not np.isin(core.ids, self._marked_ids()).any(), "marked id reported"
        limit = s + 2 * cfg.k + (s - 1 if cfg.insertion_epochs else 0)
        assert len(core) <= max(limit, s), f"root coreset size {len(core)} > {limit}"
        return {"leaves": len(leaves), "mass": mass, "root_excess": self.root.excess,
                "min_depth": min(depths), "max_depth": max(depths)}

    # -- internals ----------------------------------------------------------

    def _reset_tree(self):
        self.root = self.special = _Node(bag=PointBag(self.dim))

    def _make_leaf(self, ids, X, w):
        bag = PointBag(self.dim, cap=max(self.cfg.s, 1))
        for i in range(len(ids)):
            bag.add(int(ids[i]), X[i], float(w[i]))
        return _Node(bag=bag)

    def _assemble(self, leaves, parent):
        if len(leaves) == 1:
            leaves[0].parent = parent
            return leaves[0]
        v = _Node(parent)
        mid = (len(leaves) + 1) // 2
        v.left = self._assemble(leaves[:mid], v)
        v.right = self._assemble(leaves[mid:], v)
        return v

    def _rebuild_all(self, v):
        if v.is_leaf:
            return
        self._rebuild_all(v.left)
        self._rebuild_all(v.right)
        self._rebuild(v, drop_marked=False)

    def _marked_ids(self):
        if self._marked_arr is None:
            self._marked_arr = np.fromiter(self.marked, np.int64, len(self.marked))
        return self._marked_arr

    def _maintained(self, v):
        if v.is_leaf:
            return v.bag.view()
        if v.bn == 0:
            return v.ids, v.X, v.w
        n = v.bn
        return (np.concatenate([v.ids, v.bids[:n]]),
                np.concatenate([v.X, v.bX[:n]]),
                np.concatenate([v.w, v.bw[:n]]))

    def _in_root(self, pid):
        r = self.root
        if r.is_leaf:
            return pid in r.bag.slot
        if (r.ids == pid).any():
            return True
        return r.bn > 0 and bool((r.bids[:r.bn] == pid).any())

    def _append_buffer(self, v, pid, x, w):
        if v.bids is None:
            s = self.cfg.s
            v.bids = np.empty(s, np.int64)
            v.bX = np.empty((s, self.dim))
            v.bw = np.empty(s)
        n = v.bn
        v.bids[n] = pid
        v.bX[n] = x
        v.bw[n] = w
        v.bn = n + 1

    def _rebuild(self, v, drop_marked):
        """Recompute the coreset of inner node v from its children."""
        a_ids, a_X, a_w = self._maintained(v.left)
        b_ids, b_X, b_w = self._maintained(v.right)
        ids = np.concatenate([a_ids, b_ids])
        X = np.concatenate([a_X, b_X])
        w = np.concatenate([a_w, b_w])
        w_in = float(w.sum())
        excess = v.left.excess + v.right.excess
        clamped = v.left.clamped + v.right.clamped
        if drop_marked and self.marked and len(ids):
            keep = ~np.isin(ids, self._marked_ids())
            if not keep.all():
                self.stats.purged += int((~keep).sum())
                self.stats.dropped_mass += float(w[~keep].sum())
                ids, X, w = ids[keep], X[keep], w[keep]
        if len(ids) > self.cfg.s:
            cfg = self.cfg
            ids, X, w, c = build_from_arrays(ids, X, w, cfg.k, cfg.s, self.rng,
                                             cfg.eps_w, cfg.negative)
            clamped += c
            self.stats.clamped_mass += c
        v.ids, v.X, v.w = ids, X, w
        v.excess = excess + float(w.sum()) - w_in
        v.clamped = clamped
        v.bn = 0
        self.stats.rebuilds += 1

    def _rebuild_upward(self, v, drop_marked):
        while v is not None:
            self._rebuild(v, drop_marked)
            v = v.parent

    def _rebuild_dirty(self, dirty):
        """Recompute every inner ancestor of the dirty nodes once, bottom-up."""
        todo = {}
        for v in dirty:
            u = v if not v.is_leaf else v.parent
            while u is not None and u not in todo:
                todo[u] = None
                u = u.parent
        order = sorted(todo, key=_depth, reverse=True)
        for u in order:
            self._rebuild(u, drop_marked=False)

    def _replace(self, old, new):
        p = old.parent
        new.parent = p
        if p is None:
            self.root = new
        elif p.left is old:
            p.left = new
        else:
            p.right = new

    def _swap(self, a, b):
        pa, pb = a.parent, b.parent
        if pa is pb:
            pa.left, pa.right = pa.right, pa.left
            return
        a_left = pa.left is a
        b_left = pb.left is b
        if a_left:
            pa.left = b
        else:
            pa.right = b
        if b_left:
            pb.left = a
        else:
            pb.right = a
        a.parent, b.parent = pb, pa

    def _leftmost_shallowest_leaf(self):
        level = [self.root]
        while True:
            for v in level:
                if v.is_leaf:
                    return v
            level = [c for v in level for c in (v.left, v.right)]

    def _rightmost_deepest_leaf(self):
        level = [self.root]
        last = None
        while level:
            for v in level:
                if v.is_leaf:
                    last = v
            nxt = [c for v in level if not v.is_leaf for c in (v.left, v.right)]
            if not nxt:
                return level[-1] if level[-1].is_leaf else last
            level = nxt
        return last

    def _promote_special(self):
        """The full special leaf turns normal; split the leftmost shallowest
        leaf to host a fresh, empty special leaf."""
        target = self._leftmost_shallowest_leaf()
        v = _Node()
        self._replace(target, v)
        fresh = _Node(parent=v, bag=PointBag(self.dim, cap=max(self.cfg.s, 1)))
        v.left, v.right = target, fresh
        target.parent = v
        ids, X, w = target.bag.view()
        v.ids, v.X, v.w = ids.copy(), X.copy(), w.copy()
        self.special = fresh

    def _detach_leaf(self, leaf, dirty):
        r = self._rightmost_deepest_leaf()
        if r is not leaf:
            self._swap(leaf, r)
            dirty[r] = None
        p = leaf.parent
        sib = p.right if p.left is leaf else p.left
        self._replace(p, sib)
        dirty[sib] = None
        leaf.parent = None

    def _remove_points(self, victims):
        dirty = {}
        for pid in victims:
            leaf = self.live.pop(pid)
            leaf.bag.remove(pid)
            dirty[leaf] = None
        half = self.cfg.s / 2
        for leaf in list(dirty):
            if leaf is self.special or leaf.bag.n > half:
                continue
            moved = leaf.bag.view()
            moved = [(int(moved[0][i]), moved[1][i].copy(), float(moved[2][i]))
                     for i in range(leaf.bag.n)]
            dirty.pop(leaf, None)
            self._detach_leaf(leaf, dirty)
            for pid, x, w in moved:
                sp = self.special
                sp.bag.add(pid, x, w)
                self.live[pid] = sp
                dirty[sp] = None
                if sp.bag.n >= self.cfg.s:
                    self._promote_special()
        self._rebuild_dirty(dirty)

    def _check_phase(self):
        n = len(self)
        n0 = self.phase_start_size
        if n >= 1.5 * n0 or (n0 > self.cfg.s and n <= n0 / 1.5):
            self.start_phase()
