"""
Choosing the arity of a shallow tree
====================================

A shallow tree of height h has g**h leaves. Balancing leaf work (n / g**h
points each) against inner work (g coresets of size s) suggests
g = (n / s) ** (1 / (h + 1)). Time a random window of roughly constant size
for a few arities around that value, starting from n points so the size
stays near n.
"""

import time

from dyncoreset.shallow import ShallowConfig, ShallowTree, optimal_g
from dyncoreset.streams import Delete, Dataset, gen_birch_like, gen_random_window

n, k, s, h = 8000, 10, 50, 1
best = optimal_g(n, s, h)
print(f"balanced arity for n={n}, s={s}, h={h}: g={best}")

data = gen_birch_like(3 * n, n_clusters=60, rng=2)
warm, rest = data.head(n), Dataset(data.ids[n:], data.points[n:], data.weights[n:])

for g in sorted({max(2, best // 2), best, 2 * best}):
    tree = ShallowTree(ShallowConfig(k=k, s=s, n_hint=n, h=h, g=g), derive_g=False)
    for i in range(n):
        tree.insert(int(warm.ids[i]), warm.points[i])
    ops = 0
    start = time.perf_counter()
    for ev in gen_random_window(rest, 0.5, rng=0):
        if isinstance(ev, Delete):
            tree.delete(ev.id)
        else:
            tree.insert(ev.id, ev.point)
        ops += 1
        if ops == 2000:
            break
    per_op = (time.perf_counter() - start) / ops
    print(f"g={g:3d}: {per_op * 1e6:7.0f} us per update, {tree.rebuilds} node rebuilds")
