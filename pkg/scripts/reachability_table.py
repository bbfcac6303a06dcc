"""Reachability of every router across failure ratios and seeds.

    python3 scripts/reachability_table.py --ratios 0,0.1,0.2,0.3 --seeds 1,2,3
"""
import argparse
import statistics

from _common import DEFAULT_CONFIG, emit, summarise


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--ratios", default="0,0.1,0.2,0.3")
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--policy", default="CTV")
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for ratio in (float(r) for r in args.ratios.split(",")):
        per_router = {}
        for seed in (int(s) for s in args.seeds.split(",")):
            s = summarise(args.config, [f"seed={seed}", f"failure.ratio={ratio}", f"routing.policy={args.policy}"])
            for name, r in s["routers"].items():
                per_router.setdefault(name, []).append(r["reachability_pct"])
            # the RANDOM-strategy ablation needs its own DABNet
            rnd = summarise(args.config, [f"seed={seed}", f"failure.ratio={ratio}", "dabnet.strategy=RANDOM",
                                          "routing.routers=[dabr_nonbas]", f"routing.policy={args.policy}"])
            per_router.setdefault("dabr_nonbas+RANDOM", []).append(rnd["routers"]["dabr_nonbas"]["reachability_pct"])
        for name, vals in per_router.items():
            rows.append({"failure_ratio": ratio, "router": name, "mean_pct": round(statistics.fmean(vals), 3),
                         "std_pct": round(statistics.pstdev(vals), 3), "seeds": len(vals)})
    emit(rows, args.out)


if __name__ == "__main__":
    main()
