"""
Keeping a coreset alive under a sliding window
==============================================

Replay a sliding window over Birch-like data into the plain dynamic tree and
into the optimized one (insertion epochs plus lazy deletes), then compare the
work done and the quality of the root coreset.
"""

import time

from dyncoreset.dyntree import DynTree, DynTreeConfig
from dyncoreset.metrics import evaluate
from dyncoreset.streams import Delete, gen_birch_like, gen_sliding_window

data = gen_birch_like(12000, n_clusters=30, rng=3)
t, k, s = 4000, 10, 50

trees = {
    "plain": DynTree(DynTreeConfig(k=k, s=s, rng_seed=0)),
    "optimized": DynTree(DynTreeConfig(k=k, s=s, insertion_epochs=True, lazy_deletes=True,
                                       delta=2 * s / t, rng_seed=0)),
}

for name, tree in trees.items():
    start = time.perf_counter()
    for ev in gen_sliding_window(data, t):
        if isinstance(ev, Delete):
            tree.delete(ev.id)
        else:
            tree.insert(ev.id, ev.point, ev.weight)
    took = time.perf_counter() - start
    st = tree.stats
    print(f"{name:>9}: {took:5.1f}s, {st.rebuilds} node rebuilds, {st.flushes} flushes, "
          f"{st.marks} lazy marks, {st.phase_rebuilds} phases")

# the window now holds the last t points of the data; a single k-means++ run
# is noisy, so report medians over a few seeds
window = data.points[-t:]
for name, tree in trees.items():
    C = tree.root_coreset()
    runs = [evaluate(C, window, k, seed=e) for e in range(5)]
    D = sorted(r.distortion for r in runs)[2]
    Q = sorted(r.quality for r in runs)[2]
    print(f"{name:>9}: |C| = {len(C)}, median distortion {D:.3f}, median quality {Q:.3f}")
