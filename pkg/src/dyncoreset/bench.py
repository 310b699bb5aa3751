"""Benchmark harness: ingest data, replay a stream, time it, checkpoint metrics.

Each timed operation covers the structure update plus extraction of a
k-means++ solution from the current coreset (for `kmeans_only`, just the
solution on the full live data). Metric checkpoints and report writing happen
outside the timed sections.
"""
import csv
import json
import logging
import math
import os
import time
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np

from dyncoreset.coreset import ConfigError, build_from_arrays
from dyncoreset.dyntree import DynTree, DynTreeConfig, PointBag
from dyncoreset.metrics import evaluate
from dyncoreset.seeding import kmeanspp
from dyncoreset.shallow import RebuildRequired, ShallowConfig, ShallowTree
from dyncoreset.streams import Dataset, Delete, StreamSpec, gen_birch_like, make_stream

log = logging.getLogger(__name__)

ALGORITHMS = ("dynamic", "optimized_dynamic", "shallow", "static", "random", "kmeans_only")
CSV_FIELDS = ("repeat", "op", "live", "time_ns", "distortion", "quality")


# -- data ingestion -----------------------------------------------------------

def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def ingest_csv(path, dedupe=False, shuffle=False, rng=None,
               has_id: Optional[bool] = None, has_weight: Optional[bool] = None) -> Dataset:
    """Read one point per row, optionally preceded by an id and followed by a weight.

    A first row without any numeric field is taken as a header; when present
    it decides `has_id` (first column named "id") and `has_weight` (last
    column named "weight") unless those are given explicitly. Without ids the
    rows are numbered 0.. in file order (after deduplication).
    """
    rows, header = [], None
    width = None
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, rec in enumerate(csv.reader(f), 1):
            if not rec or all(not t.strip() for t in rec):
                continue
            if lineno == 1 and not any(_is_number(t) for t in rec):
                header = [t.strip().lower() for t in rec]
                width = len(header)
                continue
            if width is None:
                width = len(rec)
            elif len(rec) != width:
                raise ValueError(f"{path}:{lineno}: expected {width} fields, got {len(rec)}")
            try:
                rows.append([float(t) for t in rec])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric field in {rec!r}") from None
            if not all(math.isfinite(v) for v in rows[-1]):
                raise ValueError(f"{path}:{lineno}: non-finite value")
    if has_id is None:
        has_id = bool(header) and header[0] == "id"
    if has_weight is None:
        has_weight = bool(header) and header[-1] == "weight"
    ncols = (width or 0) - int(has_id) - int(has_weight)
    if rows and ncols < 1:
        raise ValueError(f"{path}: rows carry no coordinates")
    A = np.array(rows, dtype=np.float64).reshape(len(rows), width or 0)
    lo = int(has_id)
    X = A[:, lo:lo + ncols].copy()
    w = A[:, -1].copy() if has_weight else np.ones(len(A))
    if has_id:
        ids = A[:, 0]
        if np.any(ids != np.round(ids)) or np.any(ids < 0):
            raise ValueError(f"{path}: ids must be non-negative integers")
        ids = ids.astype(np.int64)
    if np.any(w <= 0):
        raise ValueError(f"{path}: weights must be positive")
    if dedupe and len(X):
        _, first = np.unique(X, axis=0, return_index=True)
        keep = np.sort(first)
        X, w = X[keep], w[keep]
        if has_id:
            ids = ids[keep]
    if not has_id:
        ids = np.arange(len(X), dtype=np.int64)
    elif len(np.unique(ids)) != len(ids):
        raise ValueError(f"{path}: duplicate ids")
    if shuffle:
        perm = np.random.default_rng(rng).permutation(len(X))
        X, w, ids = X[perm], w[perm], ids[perm]
    return Dataset(ids, X, w)


def write_dataset_csv(data: Dataset, path):
    d = data.dim
    with open(path, "w", newline="", encoding="utf-8") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["id"] + [f"x{j}" for j in range(d)] + ["weight"])
        for i in range(len(data)):
            out.writerow([int(data.ids[i])] + [repr(float(v)) for v in data.points[i]]
                         + [repr(float(data.weights[i]))])


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 100_000
    n_clusters: int = 100
    d: int = 2
    seed: int = 0

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SyntheticSpec":
        """`N[:clusters[:d]]`, optionally prefixed with `birch:`."""
        text = text.strip()
        if text.startswith("birch"):
            text = text[len("birch"):].lstrip(":")
        parts = [p for p in text.split(":") if p]
        try:
            vals = [int(p) for p in parts]
        except ValueError:
            raise ConfigError(f"bad synthetic spec {text!r}; expected N[:clusters[:d]]") from None
        if len(vals) > 3:
            raise ConfigError(f"bad synthetic spec {text!r}; expected N[:clusters[:d]]")
        return cls(*vals, seed=seed) if vals else cls(seed=seed)

    def make(self) -> Dataset:
        return gen_birch_like(self.n, self.n_clusters, self.d, rng=self.seed)


# -- configuration and records --------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "optimized_dynamic"
    k: int = 10
    s: Optional[int] = None             # None: 5k
    delta: Optional[float] = None       # None: 2s/t for sliding windows, else 0.03
    stream: StreamSpec = field(default_factory=StreamSpec)
    input_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    dedupe: bool = False
    shuffle: bool = False
    measure_start: int = 0
    measure_count: Optional[int] = None  # None: every op from measure_start on
    checkpoint_every: int = 100          # 0 disables checkpoints
    bucket: int = 20
    repeats: int = 5
    rng_seed: int = 0
    insertion_epochs: bool = True        # optimized_dynamic only
    shallow_h: int = 1
    trace_counters: bool = False
    name: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.s is not None and self.s <= self.k:
            raise ConfigError(f"s={self.s} must exceed k={self.k}")
        if self.delta is not None and not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.bucket < 1:
            raise ConfigError("bucket must be >= 1")
        if self.measure_start < 0 or (self.measure_count is not None and self.measure_count < 0):
            raise ConfigError("measure window must be non-negative")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0")
        if self.shallow_h < 1:
            raise ConfigError("shallow_h must be >= 1")
        if (self.input_path is None) == (self.synthetic is None):
            raise ConfigError("give exactly one of input_path and synthetic")

    @property
    def coreset_size(self) -> int:
        return 5 * self.k if self.s is None else self.s

    def resolved_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        if self.stream.kind == "sliding_window":
            return min(1.0, 2 * self.coreset_size / self.stream.t)
        return 0.03

    @property
    def label(self) -> str:
        return self.name or self.algorithm

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["stream"] = StreamSpec(**d["stream"])
        if d.get("synthetic") is not None:
            d["synthetic"] = SyntheticSpec(**d["synthetic"])
        return cls(**d)


@dataclass
class Checkpoint:
    op: int
    live: int
    distortion: float
    quality: float


@dataclass
class RepeatRecord:
    seed: int
    n_ops: int = 0
    bucket_ops: List[int] = field(default_factory=list)    # last op index of each bucket
    bucket_live: List[int] = field(default_factory=list)
    bucket_ns: List[float] = field(default_factory=list)   # mean ns per op in the bucket
    checkpoints: List[Checkpoint] = field(default_factory=list)
    measured_ops: int = 0
    measured_ns: int = 0
    stats: Dict[str, float] = field(default_factory=dict)
    counter_trace: Optional[list] = None

    @property
    def mean_op_ns(self) -> float:
        return self.measured_ns / self.measured_ops if self.measured_ops else math.nan

    def qualities(self):
        return np.array([c.quality for c in self.checkpoints])

    def distortions(self):
        return np.array([c.distortion for c in self.checkpoints])


@dataclass
class RunRecord:
    config: RunConfig
    repeats: List[RepeatRecord] = field(default_factory=list)

    @property
    def name(self):
        return self.config.label

    def summary(self) -> dict:
        """Aggregates over repeats.

        op_ns: mean and median of the per-repeat mean op times. distortion and
        quality: mean and median over all checkpoints of all repeats.
        """
        op = [r.mean_op_ns for r in self.repeats if r.measured_ops]
        D = np.concatenate([r.distortions() for r in self.repeats]) if self.repeats else np.zeros(0)
        Q = np.concatenate([r.qualities() for r in self.repeats]) if self.repeats else np.zeros(0)

        def agg(v):
            v = np.asarray(v, dtype=float)
            if len(v) == 0:
                return {"mean": None, "median": None}
            return {"mean": float(np.mean(v)), "median": float(np.median(v))}

        return {"op_ns": agg(op), "distortion": agg(D), "quality": agg(Q),
                "checkpoints": int(len(Q)), "repeats": len(self.repeats)}


# -- algorithm adapters ---------------------------------------------------------

class _Tree:
    def __init__(self, tree):
        self.tree = tree

    def insert(self, pid, x, w):
        self.tree.insert(pid, x, w)

    def delete(self, pid):
        self.tree.delete(pid)

    def coreset(self):
        c = self.tree.root_coreset()
        return c.points, c.weights

    def stats(self):
        return self.tree.stats.as_dict()


class _Shallow:
    def __init__(self, cfg: ShallowConfig):
        self.tree = ShallowTree(cfg)

    def insert(self, pid, x, w):
        try:
            self.tree.insert(pid, x, w)
        except RebuildRequired:
            self.tree.rebuild(len(self.tree) + 1)
            self.tree.insert(pid, x, w)

    def delete(self, pid):
        try:
            self.tree.delete(pid)
        except RebuildRequired:
            self.tree.rebuild(len(self.tree))
            self.tree.delete(pid)

    def coreset(self):
        c = self.tree.root_coreset()
        return c.points, c.weights

    def stats(self):
        return {"rebuilds": self.tree.rebuilds, "phase_rebuilds": self.tree.phase_rebuilds,
                "g": self.tree.cfg.g, "h": self.tree.cfg.h}


class _Live:
    """Recompute-from-scratch baselines over a plain live set."""

    def __init__(self, kind, k, s, rng):
        self.kind, self.k, self.s, self.rng = kind, k, s, rng
        self.bag = None
        self.recomputes = 0

    def insert(self, pid, x, w):
        if self.bag is None:
            self.bag = PointBag(len(x))
        self.bag.add(pid, x, w)

    def delete(self, pid):
        self.bag.remove(pid)

    def coreset(self):
        ids, X, w = self.bag.view()
        self.recomputes += 1
        if self.kind == "static":
            _, cX, cw, _ = build_from_arrays(ids, X, w, self.k, self.s, self.rng)
            return cX, cw
        if self.kind == "random":
            return random_sample(X, w, self.s, self.rng)
        return X, w

    def stats(self):
        return {"recomputes": self.recomputes}


def random_sample(X, w, s, rng):
    """Uniform sample of s records without replacement, each of weight W / s."""
    n = X.shape[0]
    if n <= s:
        return X.copy(), w.copy()
    pick = rng.choice(n, size=s, replace=False)
    return X[pick], np.full(s, float(w.sum()) / s)


def _make_algo(cfg: RunConfig, seed: int):
    k, s = cfg.k, cfg.coreset_size
    if cfg.algorithm == "dynamic":
        return _Tree(DynTree(DynTreeConfig(k, s, rng_seed=seed)))
    if cfg.algorithm == "optimized_dynamic":
        delta = cfg.resolved_delta()
        return _Tree(DynTree(DynTreeConfig(k, s, delta=delta,
                                           insertion_epochs=cfg.insertion_epochs,
                                           lazy_deletes=delta > 0, rng_seed=seed)))
    if cfg.algorithm == "shallow":
        hint = cfg.stream.t if cfg.stream.kind in ("sliding_window", "snake_window") else s
        base = ShallowConfig(k, s, n_hint=max(s, 2 ** cfg.shallow_h), h=cfg.shallow_h,
                             rng_seed=seed)
        return _Shallow(base.resized(hint))
    return _Live(cfg.algorithm, k, s, np.random.default_rng(seed))


# -- replay -----------------------------------------------------------------------

def load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.input_path is not None:
        return ingest_csv(cfg.input_path, cfg.dedupe, cfg.shuffle, cfg.rng_seed)
    data = cfg.synthetic.make()
    if cfg.dedupe:
        _, first = np.unique(data.points, axis=0, return_index=True)
        keep = np.sort(first)
        data = Dataset(data.ids[keep], data.points[keep], data.weights[keep],
                       None if data.labels is None else data.labels[keep])
    if cfg.shuffle:
        perm = np.random.default_rng(cfg.rng_seed).permutation(len(data))
        data = Dataset(np.arange(len(data), dtype=np.int64), data.points[perm],
                       data.weights[perm], None if data.labels is None else data.labels[perm])
    return data


def metric_seed(seed: int, op: int) -> int:
    """Seed shared by every algorithm evaluated at the same step of a repeat."""
    return seed * 1_000_003 + op


def replay(cfg: RunConfig, data: Dataset, repeat: int = 0) -> RepeatRecord:
    """One seeded pass over the stream; repeat r uses seeds offset by r."""
    seed = cfg.rng_seed + repeat
    stream = make_stream(data, replace(cfg.stream, rng_seed=cfg.stream.rng_seed + repeat))
    algo = _make_algo(cfg, seed)
    solve_rng = np.random.default_rng([seed, 1])
    truth = PointBag(data.dim)
    rec = RepeatRecord(seed=seed, counter_trace=[] if cfg.trace_counters else None)
    k = cfg.k
    lo = cfg.measure_start
    hi = math.inf if cfg.measure_count is None else lo + cfg.measure_count
    only_solution = cfg.algorithm == "kmeans_only"
    every = cfg.checkpoint_every
    acc_ns = acc_n = 0
    clock = time.perf_counter_ns

    for i, ev in enumerate(stream):
        timed = lo <= i < hi
        checkpoint = every and (i + 1) % every == 0
        is_del = isinstance(ev, Delete)
        sol = C = None
        t0 = clock()
        if is_del:
            algo.delete(ev.id)
        else:
            algo.insert(ev.id, ev.point, ev.weight)
        if timed or checkpoint:
            if only_solution:
                t0 = clock()
            C = algo.coreset()
            if len(C[0]):
                sol = kmeanspp(C[0], C[1], k, solve_rng)
        t1 = clock()
        # everything below is untimed
        if is_del:
            truth.remove(ev.id)
        else:
            truth.add(ev.id, ev.point, ev.weight)
        if rec.counter_trace is not None:
            rec.counter_trace.append(tuple(sorted(algo.stats().items())))
        if timed:
            acc_ns += t1 - t0
            acc_n += 1
            rec.measured_ns += t1 - t0
            rec.measured_ops += 1
            if acc_n == cfg.bucket:
                rec.bucket_ops.append(i)
                rec.bucket_live.append(truth.n)
                rec.bucket_ns.append(acc_ns / acc_n)
                acc_ns = acc_n = 0
        if checkpoint and sol is not None:
            _, X, w = truth.view()
            r = evaluate(C, (X, w), k, seed=metric_seed(seed, i), solution=sol)
            rec.checkpoints.append(Checkpoint(i, truth.n, r.distortion, r.quality))
        rec.n_ops = i + 1
    if acc_n:
        rec.bucket_ops.append(rec.n_ops - 1)
        rec.bucket_live.append(truth.n)
        rec.bucket_ns.append(acc_ns / acc_n)
    rec.stats = algo.stats()
    return rec


def warmup(d=2):
    """Load the compiled kernels so their first-call cost stays out of timings."""
    rng = np.random.default_rng(0)
    X = rng.normal(size=(16, d))
    build_from_arrays(np.arange(16), X, np.ones(16), 2, 4, rng)
    kmeanspp(X, None, 2, rng)
    evaluate((X, None), (X, None), 2)


def run(cfg: RunConfig) -> RunRecord:
    """Replay the configured stream `cfg.repeats` times with seeds rng_seed, rng_seed+1, ..."""
    data = load_dataset(cfg)
    if len(data) == 0:
        raise ConfigError("dataset is empty")
    make_stream(data, cfg.stream)   # surfaces stream config errors before timing
    if cfg.stream.kind == "sliding_window" and cfg.stream.t > len(data):
        raise ConfigError(f"window t={cfg.stream.t} exceeds dataset size {len(data)}")
    warmup(data.dim)
    record = RunRecord(cfg)
    for r in range(cfg.repeats):
        log.info("%s: repeat %d/%d", cfg.label, r + 1, cfg.repeats)
        record.repeats.append(replay(cfg, data, r))
    return record


# -- reports ------------------------------------------------------------------------

def _fmt(v):
    return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)


def write_csv(record: RunRecord, path):
    with open(path, "w", newline="", encoding="utf-8") as f:
        out = csv.writer(f, lineterminator="\n", quoting=csv.QUOTE_NONE)
        out.writerow(CSV_FIELDS)
        for r, rep in enumerate(record.repeats):
            rows = {}
            for op, live, ns in zip(rep.bucket_ops, rep.bucket_live, rep.bucket_ns):
                rows[op] = [r, op, live, float(ns), None, None]
            for c in rep.checkpoints:
                row = rows.setdefault(c.op, [r, c.op, c.live, None, None, None])
                row[4], row[5] = float(c.distortion), float(c.quality)
            for op in sorted(rows):
                out.writerow([_fmt(v) for v in rows[op]])


def read_csv(path) -> List[RepeatRecord]:
    """Rebuild the bucket and checkpoint series of each repeat from a report CSV."""
    reps: Dict[int, RepeatRecord] = {}
    with open(path, newline="", encoding="utf-8") as f:
        rd = csv.reader(f)
        header = next(rd, None)
        if header is None or tuple(header) != CSV_FIELDS:
            raise ValueError(f"{path}: not a run report (header {header!r})")
        for lineno, row in enumerate(rd, 2):
            if len(row) != len(CSV_FIELDS):
                raise ValueError(f"{path}:{lineno}: expected {len(CSV_FIELDS)} fields")
            r, op, live = int(row[0]), int(row[1]), int(row[2])
            rep = reps.setdefault(r, RepeatRecord(seed=r))
            if row[3]:
                rep.bucket_ops.append(op)
                rep.bucket_live.append(live)
                rep.bucket_ns.append(float(row[3]))
            if row[4]:
                rep.checkpoints.append(Checkpoint(op, live, float(row[4]), float(row[5])))
    return [reps[r] for r in sorted(reps)]


def speedup(fast: RunRecord, slow: RunRecord) -> float:
    """Mean per-op time of `slow` divided by that of `fast`."""
    return slow.summary()["op_ns"]["mean"] / fast.summary()["op_ns"]["mean"]


def summary_dict(record: RunRecord, baselines=()) -> dict:
    out = {
        "name": record.name,
        "config": record.config.to_dict(),
        "summary": record.summary(),
        "repeats": [{"seed": r.seed, "n_ops": r.n_ops, "measured_ops": r.measured_ops,
                     "mean_op_ns": r.mean_op_ns, "stats": r.stats} for r in record.repeats],
        "speedup": {},
    }
    for b in baselines:
        out["speedup"][b.name] = speedup(record, b)
    return out


def write_json(record: RunRecord, path, baselines=()):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary_dict(record, baselines), f, indent=2, default=_json_default)
        f.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def report(record: RunRecord, path, fmt="both", baselines=()):
    """Write `path` as CSV or JSON; with fmt="both", `path` is a stem."""
    path = str(path)
    if fmt == "csv":
        write_csv(record, path)
    elif fmt == "json":
        write_json(record, path, baselines)
    elif fmt == "both":
        stem, ext = os.path.splitext(path)
        if ext not in (".csv", ".json"):
            stem = path
        write_csv(record, stem + ".csv")
        write_json(record, stem + ".json", baselines)
    else:
        raise ConfigError(f"unknown report format {fmt!r}")


def compare(summaries: List[dict], baseline: Optional[str] = None) -> List[dict]:
    """One row per run: time per op, speedup over `baseline`, distortion, quality."""
    by_name = {s["name"]: s for s in summaries}
    if baseline is not None and baseline not in by_name:
        raise ConfigError(f"baseline {baseline!r} not among {sorted(by_name)}")
    base_ns = by_name[baseline]["summary"]["op_ns"]["mean"] if baseline else None
    rows = []
    for s in summaries:
        sm = s["summary"]
        ns = sm["op_ns"]["mean"]
        rows.append({
            "name": s["name"],
            "algorithm": s["config"]["algorithm"],
            "op_ms": None if ns is None else ns / 1e6,
            "speedup": None if not (base_ns and ns) else base_ns / ns,
            "distortion": sm["distortion"]["median"],
            "quality": sm["quality"]["median"],
        })
    return rows


def format_table(rows: List[dict]) -> str:
    cols = ["name", "algorithm", "op_ms", "speedup", "distortion", "quality"]
    cells = [[("-" if r[c] is None else f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]))
              for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[j]) for row in cells)) if cells else len(c)
              for j, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(cols, widths))]
    lines += ["  ".join(v.ljust(wd) for v, wd in zip(row, widths)) for row in cells]
    return "\n".join(lines)
