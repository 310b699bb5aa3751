"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

The lines are also collected and echoed in the pytest terminal summary.
"""
import hashlib
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dyncoreset.bench import RunConfig, SyntheticSpec, run
from dyncoreset.core import cost
from dyncoreset.coreset import Coreset, CoresetConfig, build_coreset, sensitivity_sample
from dyncoreset.dyntree import DynTree, DynTreeConfig
from dyncoreset.metrics import default_solutions, distortion, quality
from dyncoreset.seeding import bicriteria
from dyncoreset.shallow import optimal_g
from dyncoreset.streams import (Dataset, Delete, StreamSpec, birch_snake_spec, gen_birch_like,
                                gen_insert_only, gen_random_window, gen_sliding_window,
                                gen_snake_window, make_stream, replay_check)


def verdict(n, ok, detail):
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# 1 -------------------------------------------------------------------------------

def test_c01_exact_formulas():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(50):
        n, d = int(rng.integers(2, 300)), int(rng.integers(1, 6))
        X = rng.normal(size=(n, d)) * rng.uniform(0.1, 100)
        w = rng.uniform(0.1, 10, n)
        S = rng.normal(size=(int(rng.integers(1, 8)), d))
        cut = int(rng.integers(0, n))
        whole = cost(S, X, w)
        parts = cost(S, X[:cut], w[:cut]) + cost(S, X[cut:], w[cut:])
        a = rng.uniform(0.1, 10)
        lin = cost(S, X, a * w)
        worst = max(worst, abs(parts - whole) / whole, abs(lin - a * whole) / (a * whole))
        sols = default_solutions((X, w), (X, w), 3, seed=int(rng.integers(1000)))
        assert distortion((X, w), (X, w), sols) == 0.0
        d2 = distortion(Coreset.from_points(X, 2 * w), (X, w), sols + [S])
        worst = max(worst, abs(d2 - 1.0))
        assert quality((X, w), (X, w), 3, seed=int(rng.integers(1000))) == 1.0
    took = time.perf_counter() - t0
    verdict(1, worst <= 1e-9 and took < 60,
            f"max relative error {worst:.2e}, {took:.1f}s")


# 2 -------------------------------------------------------------------------------

def test_c02_coreset_algebra():
    rng = np.random.default_rng(2)
    worst = 0.0
    size_ok = passthrough_ok = True
    for i in range(100):
        n, d = int(rng.integers(1, 501)), int(rng.integers(1, 6))
        k = int(rng.integers(1, 6))
        s = k + int(rng.integers(1, 60))
        eps = float(rng.choice([0.0, 0.05, 0.2]))
        centers = rng.uniform(-100, 100, size=(k + 2, d))
        X = centers[rng.integers(k + 2, size=n)] + rng.normal(size=(n, d))
        w = rng.uniform(0.1, 5, n)
        B = bicriteria(X, w, k, rng)
        dr = sensitivity_sample(X, w, B, k, s, rng, eps)
        if dr.total_cost > 0:
            landed = np.bincount(dr.labels[dr.picks], weights=dr.pick_weights,
                                 minlength=len(B))
            target = (1 + eps) * dr.cluster_mass
            err = np.abs(landed + dr.center_weights - target) / np.maximum(target, 1e-300)
            worst = max(worst, float(err.max()))
        for policy in ("rescale", "clamp"):
            c = build_coreset(X, w, CoresetConfig(k=k, s=s, eps_w=eps, negative=policy), rng=i)
            size_ok &= len(c) <= s + 2 * k
            if n <= s:
                passthrough_ok &= (c.points.tobytes() == X.tobytes()
                                   and c.weights.tobytes() == w.tobytes()
                                   and c.ids.tobytes() == np.arange(n).tobytes())
    verdict(2, worst <= 1e-9 and size_ok and passthrough_ok,
            f"identity error {worst:.2e}, size bound {size_ok}, pass-through {passthrough_ok}")


# 3 -------------------------------------------------------------------------------

AUDIT_CONFIGS = [
    dict(),
    dict(insertion_epochs=True),
    dict(lazy_deletes=True, delta=0.03),
    dict(insertion_epochs=True, lazy_deletes=True, delta=0.1),
]


def _replay_audited(seed, audit):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(300, 700))
    data = Dataset.from_points(rng.normal(size=(n, 2)) * 20, rng.uniform(0.5, 2, n))
    cfg = DynTreeConfig(k=int(rng.integers(1, 4)), s=int(rng.integers(8, 20)), rng_seed=seed,
                        **AUDIT_CONFIGS[seed % len(AUDIT_CONFIGS)])
    tree = DynTree(cfg)
    digest = hashlib.sha256()
    for ev in gen_random_window(data, float(rng.uniform(0.55, 0.8)), seed):
        if isinstance(ev, Delete):
            tree.delete(ev.id)
        else:
            tree.insert(ev.id, ev.point, ev.weight)
        if audit:
            tree.audit()
        c = tree.root_coreset()
        digest.update(c.ids.tobytes() + c.points.tobytes() + c.weights.tobytes())
    return digest.hexdigest(), tree.stats.as_dict()


def test_c03_dynamic_structure_audits():
    t0 = time.perf_counter()
    failures = []
    for seed in range(50):
        try:
            first = _replay_audited(seed, audit=True)
        except AssertionError as exc:
            failures.append(f"seed {seed}: {exc}")
            continue
        if _replay_audited(seed, audit=False) != first:
            failures.append(f"seed {seed}: re-run differs")
    took = time.perf_counter() - t0
    verdict(3, not failures and took < 300,
            f"50 streams audited after every op, {len(failures)} failures, {took:.0f}s"
            + (f" first: {failures[0]}" if failures else ""))


# 4 -------------------------------------------------------------------------------

def test_c04_rebuild_bound():
    n, s, k = 2 ** 14, 64, 10
    X = gen_birch_like(n, 64, rng=4).points
    perm = np.random.default_rng(4).permutation(n)
    plain = DynTree(DynTreeConfig(k=k, s=s, rng_seed=0))
    fast = DynTree(DynTreeConfig(k=k, s=s, insertion_epochs=True, rng_seed=0))
    for i in range(n):
        x = X[perm[i]]
        plain.insert(i, x)
        fast.insert(i, x)
    bound = 2 * (n / s) * math.log2(n)
    ratio = plain.stats.rebuilds / fast.stats.rebuilds
    verdict(4, fast.stats.rebuilds <= bound and ratio >= 5,
            f"optimized rebuilds {fast.stats.rebuilds} <= {bound:.0f}, "
            f"plain/optimized = {ratio:.1f}")


# 5 -------------------------------------------------------------------------------

def test_c05_delta_calibration():
    t, s = 10000, 50
    delta = 2 * s / t
    common = dict(algorithm="optimized_dynamic", k=10, s=s,
                  synthetic=SyntheticSpec(30000, 30, seed=5),
                  stream=StreamSpec("sliding_window", t=t), measure_count=0,
                  checkpoint_every=100, repeats=2, rng_seed=5)
    base = run(RunConfig(delta=0.0, **common))
    lazy = run(RunConfig(delta=delta, **common))
    f0 = sum(r.stats["flushes"] for r in base.repeats)
    f1 = sum(r.stats["flushes"] for r in lazy.repeats)
    q0 = base.summary()["quality"]["median"]
    q1 = lazy.summary()["quality"]["median"]
    limit = f0 / (delta * t / 2)
    verdict(5, f1 <= limit and q1 >= 0.95 * q0,
            f"flushes {f0} -> {f1} (limit {limit:.0f}), median Q {q0:.4f} -> {q1:.4f}")


# 6 -------------------------------------------------------------------------------

def test_c06_snake_quality():
    t0 = time.perf_counter()
    common = dict(k=10, s=50, synthetic=SyntheticSpec(100_000, 100, seed=6),
                  stream=birch_snake_spec(rng_seed=6), measure_count=0,
                  checkpoint_every=100, repeats=5, rng_seed=6)
    dyn = run(RunConfig(algorithm="optimized_dynamic", **common))
    static = run(RunConfig(algorithm="static", **common))
    qd = dyn.summary()["quality"]["median"]
    qs = static.summary()["quality"]["median"]
    took = time.perf_counter() - t0
    verdict(6, qd >= 0.93 * qs and took < 900,
            f"median Q optimized {qd:.4f} vs static {qs:.4f} (ratio {qd / qs:.3f}), {took:.0f}s")


# 7 -------------------------------------------------------------------------------

def test_c07_scaling_trend():
    sizes = (5000, 10000, 20000)
    times = {"static": [], "optimized_dynamic": []}
    for n in sizes:
        for algo in times:
            cfg = RunConfig(algorithm=algo, k=10, s=50, synthetic=SyntheticSpec(n, 50, seed=7),
                            shuffle=True, measure_start=int(0.9 * n), checkpoint_every=0,
                            repeats=3, rng_seed=7)
            times[algo].append(run(cfg).summary()["op_ns"]["median"])
    st = np.array(times["static"])
    dy = np.array(times["optimized_dynamic"])
    x = np.array(sizes, dtype=float)
    slope, icept = np.polyfit(x, st, 1)
    r2 = 1 - np.sum((st - (slope * x + icept)) ** 2) / np.sum((st - st.mean()) ** 2)
    growth = dy[-1] / dy[0]
    speed = st[-1] / dy[-1]
    dslope = np.polyfit(x, dy, 1)[0]
    verdict(7, r2 >= 0.9 and growth < 2 and speed >= 20 and slope > 0,
            f"static us/op {np.round(st / 1e3, 1).tolist()} (R^2 {r2:.3f}), dynamic us/op "
            f"{np.round(dy / 1e3, 1).tolist()} (growth {growth:.2f}x), speedup@20k {speed:.0f}x, "
            f"slopes static {slope:.3g} vs dynamic {dslope:.3g} ns per point")


# 8 -------------------------------------------------------------------------------

def test_c08_optimal_g():
    rng = np.random.default_rng(8)
    bad = 0
    for _ in range(1000):
        s = int(rng.integers(1, 500))
        n = s + int(rng.integers(0, 10 ** 6))
        h = int(rng.integers(1, 8))
        g = optimal_g(n, s, h)
        bad += not (g >= 1 and optimal_g(n, s, h + 1) <= g
                    and optimal_g(n + int(rng.integers(1, 10 ** 5)), s, h) >= g
                    and (s == 1 or optimal_g(n, s - 1, h) >= g))
    exact = optimal_g(20000, 50, 1)
    verdict(8, exact == 20 and bad == 0,
            f"optimal_g(20000, 50, 1) = {exact}, {bad} monotonicity violations in 1000 triples")


# 9 -------------------------------------------------------------------------------

def test_c09_baseline_equivalence():
    mismatches = 0
    for seed in range(20):
        common = dict(k=3, s=12, synthetic=SyntheticSpec(500, 8, seed=seed),
                      stream=StreamSpec("random_window", pi=0.6, rng_seed=seed),
                      checkpoint_every=0, repeats=1, rng_seed=seed, trace_counters=True,
                      measure_count=0)
        plain = run(RunConfig(algorithm="dynamic", **common)).repeats[0]
        opt = run(RunConfig(algorithm="optimized_dynamic", delta=0.0, insertion_epochs=False,
                            **common)).repeats[0]
        mismatches += plain.counter_trace != opt.counter_trace
    verdict(9, mismatches == 0, f"{20 - mismatches}/20 streams match step for step")


# 10 ------------------------------------------------------------------------------

def test_c10_stream_generators():
    invalid = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(50, 400))
        data = Dataset.from_points(rng.normal(size=(n, 2)))
        t = int(rng.integers(1, n + 1))
        gens = [gen_insert_only(data), gen_sliding_window(data, t),
                gen_random_window(data, float(rng.uniform(0.3, 0.9)), seed),
                gen_snake_window(data, max(t, 2), 0.2, seed)]
        for g in gens:
            try:
                replay_check(g)
            except ValueError:
                invalid += 1
        invalid += sum(1 for _ in gen_sliding_window(data, t)) != 2 * n - t
    birch = gen_birch_like(100_000, 100, rng=10)
    total = sum(1 for _ in make_stream(birch, birch_snake_spec(rng_seed=10)))
    verdict(10, invalid == 0 and abs(total - 80000) <= 8000,
            f"{invalid} invalid streams or wrong sliding counts, Birch-snake events {total}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
