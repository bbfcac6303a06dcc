"""Mean per-flow jitter and latency of each router at a fixed failure ratio."""
import argparse
import statistics

from _common import DEFAULT_CONFIG, emit, summarise


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--ratio", type=float, default=0.3)
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--out")
    args = ap.parse_args()

    acc = {}
    for seed in (int(s) for s in args.seeds.split(",")):
        s = summarise(args.config, [f"seed={seed}", f"failure.ratio={args.ratio}"])
        for name, r in s["routers"].items():
            acc.setdefault(name, []).append((r["jitter_s"], r["mean_latency_s"], r["mean_stretch"]))
    rows = []
    for name, vals in acc.items():
        j, lat, st = (statistics.fmean(v for v in col if v is not None) for col in zip(*vals))
        rows.append({"router": name, "jitter_ms": round(1e3 * j, 4), "mean_latency_ms": round(1e3 * lat, 3),
                     "mean_stretch": round(st, 4)})
    emit(rows, args.out)


if __name__ == "__main__":
    main()
