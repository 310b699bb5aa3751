"""
A small speedup table
=====================

Run the benchmark harness for several algorithms on the same snake window
and print a table of per-operation times, speedups over the static baseline,
distortion and quality. The same can be done from the shell with
`dyncoreset run ...` followed by `dyncoreset compare ...`.
"""

from dyncoreset import bench
from dyncoreset.streams import StreamSpec

stream = StreamSpec("snake_window", t=5000, low_frac=0.2, max_events=12000, rng_seed=0)
common = dict(k=10, s=50, synthetic=bench.SyntheticSpec(30000, 30, seed=0), stream=stream,
              checkpoint_every=200, repeats=2, rng_seed=0)

records = [bench.run(bench.RunConfig(algorithm=a, **common))
           for a in ("static", "dynamic", "optimized_dynamic", "random")]
summaries = [bench.summary_dict(r) for r in records]
print(bench.format_table(bench.compare(summaries, baseline="static")))
