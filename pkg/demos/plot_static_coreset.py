"""
A static coreset in a few lines
===============================

Build a sensitivity-sampling coreset of a Birch-like point cloud and check
how well it prices a handful of k-means solutions.
"""

from dyncoreset.coreset import CoresetConfig, build_coreset
from dyncoreset.core import cost
from dyncoreset.seeding import kmeanspp
from dyncoreset.streams import gen_birch_like

data = gen_birch_like(20000, n_clusters=40, rng=0)
X = data.points

# 50 sampled records plus up to 20 bicriteria centers stand in for 20000 points
cfg = CoresetConfig(k=10, s=50, rng_seed=1)
C = build_coreset(X, cfg=cfg)
print(f"{len(X)} points -> {len(C)} weighted records, total weight {C.total_weight:.1f}")

# candidate solutions: k-means++ runs on the full data with different seeds
for seed in range(5):
    S = kmeanspp(X, None, 10, seed)
    full, approx = cost(S, X), cost(S, C.points, C.weights)
    print(f"solution {seed}: cost on data {full:.4g}, on coreset {approx:.4g}, "
          f"ratio {approx / full:.3f}")

# solving on the coreset alone is nearly as good as solving on the data
S_C = kmeanspp(C.points, C.weights, 10, 0)
S_X = kmeanspp(X, None, 10, 0)
print(f"quality cost(S_X)/cost(S_C) = {cost(S_X, X) / cost(S_C, X):.3f}")
