"""Command line entry point: `dyncoreset generate|run|compare`.

Set DYNCORESET_LOG=DEBUG (or INFO, WARNING, ...) for more or less chatter.
"""
import argparse
import json
import logging
import os
import sys

from dyncoreset import bench
from dyncoreset.coreset import ConfigError
from dyncoreset.streams import StreamSpec, make_stream, write_stream

log = logging.getLogger("dyncoreset")

STREAM_KINDS = ("insert_only", "sliding_window", "random_window", "snake_window")


def _add_data_args(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--input", help="CSV dataset (optional id column first, weight column last)")
    src.add_argument("--synthetic", help="Birch-like Gaussian blobs, N[:clusters[:d]]")
    p.add_argument("--dedupe", action="store_true", help="drop exact duplicate points")
    p.add_argument("--shuffle", action="store_true", help="randomly reorder the points")
    p.add_argument("--seed", type=int, default=0)


def _add_stream_args(p):
    p.add_argument("--stream", choices=STREAM_KINDS, default="insert_only")
    p.add_argument("--window", type=int, default=0, help="window size t")
    p.add_argument("--pi", type=float, default=0.5, help="insert probability (random window)")
    p.add_argument("--low-frac", type=float, default=0.2, help="snake window low-water mark")
    p.add_argument("--max-events", type=int, default=None)


def _stream_spec(a):
    return StreamSpec(a.stream, t=a.window, pi=a.pi, low_frac=a.low_frac,
                      max_events=a.max_events, rng_seed=a.seed)


def _synthetic(a):
    return bench.SyntheticSpec.parse(a.synthetic, seed=a.seed) if a.synthetic else None


def build_parser():
    ap = argparse.ArgumentParser(prog="dyncoreset",
                                 description="Dynamic k-means coresets: data, streams, benchmarks.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset or a stream file")
    g.add_argument("what", choices=("dataset", "stream"))
    _add_data_args(g)
    _add_stream_args(g)
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="replay a stream into one algorithm and report")
    r.add_argument("--algo", choices=bench.ALGORITHMS, default="optimized_dynamic")
    r.add_argument("--k", type=int, default=10)
    r.add_argument("--s", type=int, default=None, help="coreset size (default 5k)")
    r.add_argument("--delta", type=float, default=None,
                   help="deletion cut-off (default 2s/t for sliding windows, else 0.03)")
    r.add_argument("--no-epochs", action="store_true",
                   help="disable insertion epochs for optimized_dynamic")
    r.add_argument("--height", type=int, default=1, help="shallow tree height")
    _add_data_args(r)
    _add_stream_args(r)
    r.add_argument("--repeats", type=int, default=5)
    r.add_argument("--measure-start", type=int, default=0)
    r.add_argument("--measure-count", type=int, default=None)
    r.add_argument("--checkpoint-every", type=int, default=100)
    r.add_argument("--bucket", type=int, default=20)
    r.add_argument("--name", default=None)
    r.add_argument("--out", required=True, help="output path (a stem for --format both)")
    r.add_argument("--format", choices=("csv", "json", "both"), default="both")

    c = sub.add_parser("compare", help="join run summaries into a speedup table")
    c.add_argument("summaries", nargs="+", help="JSON summaries written by `run`")
    c.add_argument("--baseline", default=None, help="run name to compute speedups against")
    c.add_argument("--out", default=None, help="also write the table as CSV")
    return ap


def _load_data(a):
    if a.input is None and a.synthetic is None:
        raise ConfigError("give --input or --synthetic")
    cfg = bench.RunConfig(algorithm="kmeans_only", input_path=a.input, synthetic=_synthetic(a),
                          dedupe=a.dedupe, shuffle=a.shuffle, rng_seed=a.seed)
    return bench.load_dataset(cfg)


def cmd_generate(a):
    data = _load_data(a)
    if a.what == "dataset":
        bench.write_dataset_csv(data, a.out)
        log.info("wrote %d points to %s", len(data), a.out)
    else:
        write_stream(make_stream(data, _stream_spec(a)), a.out)
        log.info("wrote stream to %s", a.out)


def cmd_run(a):
    cfg = bench.RunConfig(
        algorithm=a.algo, k=a.k, s=a.s, delta=a.delta, stream=_stream_spec(a),
        input_path=a.input, synthetic=_synthetic(a), dedupe=a.dedupe, shuffle=a.shuffle,
        measure_start=a.measure_start, measure_count=a.measure_count,
        checkpoint_every=a.checkpoint_every, bucket=a.bucket, repeats=a.repeats,
        rng_seed=a.seed, insertion_epochs=not a.no_epochs, shallow_h=a.height, name=a.name)
    record = bench.run(cfg)
    bench.report(record, a.out, a.format)
    sm = record.summary()
    ns = sm["op_ns"]["mean"]
    q = sm["quality"]["median"]
    print(f"{record.name}: {ns / 1e3 if ns else float('nan'):.1f} us/op, "
          f"median quality {q if q is not None else float('nan'):.4f}, "
          f"{sm['checkpoints']} checkpoints")


def cmd_compare(a):
    summaries = []
    for path in a.summaries:
        with open(path, encoding="utf-8") as f:
            summaries.append(json.load(f))
    rows = bench.compare(summaries, a.baseline)
    print(bench.format_table(rows))
    if a.out:
        import csv
        with open(a.out, "w", newline="", encoding="utf-8") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)


def main(argv=None):
    level = os.environ.get("DYNCORESET_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    a = build_parser().parse_args(argv)
    try:
        {"generate": cmd_generate, "run": cmd_run, "compare": cmd_compare}[a.cmd](a)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"dyncoreset: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
