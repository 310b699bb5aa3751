"""Turn static ordered datasets into dynamic update sequences.

Four constructions are provided (insert-only, sliding window, random window,
snake window) plus a Birch-like Gaussian blob generator. All generators are
lazy and deterministic for a given seed.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Union

import numpy as np

from dyncoreset.coreset import ConfigError


class Insert(NamedTuple):
    id: int
    point: np.ndarray
    weight: float = 1.0


class Delete(NamedTuple):
    id: int


UpdateEvent = Union[Insert, Delete]


@dataclass
class Dataset:
    ids: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    labels: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.ids)

    @property
    def dim(self):
        return self.points.shape[1]

    @classmethod
    def from_points(cls, X, weights=None, ids=None, labels=None):
        X = np.asarray(X, dtype=np.float64)
        n = X.shape[0]
        return cls(np.arange(n, dtype=np.int64) if ids is None else np.asarray(ids, np.int64),
                   X,
                   np.ones(n) if weights is None else np.asarray(weights, np.float64),
                   labels)

    def head(self, m):
        return Dataset(self.ids[:m], self.points[:m], self.weights[:m],
                       None if self.labels is None else self.labels[:m])

    def event(self, i) -> Insert:
        return Insert(int(self.ids[i]), self.points[i], float(self.weights[i]))


@dataclass(frozen=True)
class StreamSpec:
    kind: str = "insert_only"   # insert_only | sliding_window | random_window | snake_window
    t: int = 0
    pi: float = 0.5
    low_frac: float = 0.2
    pi_hi: float = 0.9
    pi_lo: float = 0.1
    max_events: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        kinds = ("insert_only", "sliding_window", "random_window", "snake_window")
        if self.kind not in kinds:
            raise ConfigError(f"unknown stream kind {self.kind!r}")
        if self.kind in ("sliding_window", "snake_window") and self.t < 1:
            raise ConfigError("window size t must be >= 1")
        if self.kind == "random_window" and not 0 < self.pi < 1:
            raise ConfigError("pi must lie in (0, 1)")
        if self.kind == "snake_window" and not 0 < self.low_frac < 1:
            raise ConfigError("low_frac must lie in (0, 1)")


def gen_insert_only(data: Dataset) -> Iterator[Insert]:
    for i in range(len(data)):
        yield data.event(i)


def gen_sliding_window(data: Dataset, t: int) -> Iterator[UpdateEvent]:
    if t > len(data):
        raise ConfigError(f"window t={t} exceeds dataset size {len(data)}")
    if t < 1:
        raise ConfigError("window size t must be >= 1")
    for i in range(t):
        yield data.event(i)
    for i in range(t, len(data)):
        yield Delete(int(data.ids[i - t]))
        yield data.event(i)


class _LiveIds:
    """Id set supporting O(1) uniform sampling and removal."""

    def __init__(self):
        self.items = []
        self.pos = {}

    def __len__(self):
        return len(self.items)

    def add(self, pid):
        self.pos[pid] = len(self.items)
        self.items.append(pid)

    def pop_random(self, rng):
        i = int(rng.integers(len(self.items)))
        pid = self.items[i]
        last = self.items.pop()
        if last != pid:
            self.items[i] = last
            self.pos[last] = i
        del self.pos[pid]
        return pid


def gen_random_window(data: Dataset, pi: float, rng=None) -> Iterator[UpdateEvent]:
    """Insert the next point with probability pi, else delete a random live one.

    An empty live set always gets an insert. Stops once the data is used up.
    """
    if not 0 < pi <= 1:
        raise ConfigError("pi must lie in (0, 1]")
    rng = np.random.default_rng(rng)
    live = _LiveIds()
    nxt = 0
    while nxt < len(data):
        if len(live) == 0 or rng.random() < pi:
            ev = data.event(nxt)
            nxt += 1
            live.add(ev.id)
            yield ev
        else:
            yield Delete(live.pop_random(rng))


def gen_snake_window(data: Dataset, t: int, low_frac: float = 0.2, rng=None,
                     pi_hi: float = 0.9, pi_lo: float = 0.1,
                     max_events: Optional[int] = None) -> Iterator[UpdateEvent]:
    """Random windows chained between sizes t and ceil(low_frac * t).

    Growth phases insert with probability pi_hi until t points are live,
    shrink phases with probability pi_lo until ceil(low_frac * t) remain.
    Runs until the data is exhausted or `max_events` events were emitted.
    """
    if t < 1:
        raise ConfigError("window size t must be >= 1")
    if not 0 < low_frac < 1:
        raise ConfigError("low_frac must lie in (0, 1)")
    rng = np.random.default_rng(rng)
    low = math.ceil(low_frac * t)
    live = _LiveIds()
    nxt = 0
    growing = True
    emitted = 0
    while nxt < len(data) and (max_events is None or emitted < max_events):
        pi = pi_hi if growing else pi_lo
        if len(live) == 0 or rng.random() < pi:
            ev = data.event(nxt)
            nxt += 1
            live.add(ev.id)
            yield ev
        else:
            yield Delete(live.pop_random(rng))
        emitted += 1
        if growing and len(live) >= t:
            growing = False
        elif not growing and len(live) <= low:
            growing = True


def make_stream(data: Dataset, spec: StreamSpec) -> Iterator[UpdateEvent]:
    if spec.kind == "insert_only":
        it = gen_insert_only(data)
    elif spec.kind == "sliding_window":
        it = gen_sliding_window(data, spec.t)
    elif spec.kind == "random_window":
        it = gen_random_window(data, spec.pi, spec.rng_seed)
    else:
        return gen_snake_window(data, spec.t, spec.low_frac, spec.rng_seed,
                                spec.pi_hi, spec.pi_lo, spec.max_events)
    if spec.max_events is not None:
        return _take(it, spec.max_events)
    return it


def _take(it, m):
    for i, ev in enumerate(it):
        if i >= m:
            return
        yield ev


def birch_snake_spec(rng_seed=0) -> StreamSpec:
    """Snake window of size 20000 limited to 80000 operations."""
    return StreamSpec("snake_window", t=20000, low_frac=0.2, max_events=80000,
                      rng_seed=rng_seed)


def replay_check(events: Iterable[UpdateEvent]):
    """Validate a stream; returns (n_events, max_live, final_live).

    Raises ValueError on a delete of a dead id or a reinsert of a used id.
    """
    live = set()
    seen = set()
    n = peak = 0
    for ev in events:
        if isinstance(ev, Delete):
            if ev.id not in live:
                raise ValueError(f"event {n}: delete of non-live id {ev.id}")
            live.remove(ev.id)
        else:
            if ev.id in seen:
                raise ValueError(f"event {n}: id {ev.id} inserted twice")
            seen.add(ev.id)
            live.add(ev.id)
        n += 1
        peak = max(peak, len(live))
    return n, peak, len(live)


def gen_birch_like(n=100_000, n_clusters=100, d=2, rng=None, box=1000.0,
                   std_range=(4.0, 12.0)) -> Dataset:
    """Gaussian blobs with random centers, spreads and sizes.

    Points of one cluster are consecutive in the output; ids are 0..n-1 and
    weights are 1. `labels` holds the generating cluster of every point.
    """
    if not n >= n_clusters >= 1:
        raise ConfigError("need n >= n_clusters >= 1")
    rng = np.random.default_rng(rng)
    centers = rng.uniform(0.0, box, size=(n_clusters, d))
    stds = rng.uniform(std_range[0], std_range[1], size=n_clusters)
    share = rng.uniform(0.5, 1.5, size=n_clusters)
    sizes = 1 + rng.multinomial(n - n_clusters, share / share.sum())
    labels = np.repeat(np.arange(n_clusters), sizes)
    X = centers[labels] + rng.normal(size=(n, d)) * stds[labels, None]
    return Dataset(np.arange(n, dtype=np.int64), X, np.ones(n), labels)


def write_stream(events: Iterable[UpdateEvent], path):
    """One event per line: `I,<id>,<w>,<c1>,...,<cd>` or `D,<id>`."""
    with open(path, "w", encoding="utf-8") as f:
        for ev in events:
            if isinstance(ev, Delete):
                f.write(f"D,{ev.id}\n")
            else:
                coords = ",".join(repr(float(c)) for c in ev.point)
                f.write(f"I,{ev.id},{float(ev.weight)!r},{coords}\n")


def read_stream(path) -> Iterator[UpdateEvent]:
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                if parts[0] == "D" and len(parts) == 2:
                    yield Delete(int(parts[1]))
                elif parts[0] == "I" and len(parts) >= 4:
                    yield Insert(int(parts[1]), np.array([float(c) for c in parts[3:]]),
                                 float(parts[2]))
                else:
                    raise ValueError("bad record")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed stream line {line!r}") from exc
