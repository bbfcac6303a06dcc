"""DABNet survivability per maintenance strategy under link failures."""
import argparse

from _common import DEFAULT_CONFIG, emit, summarise

STRATEGIES = ("STATIC", "CQSBE", "RANDOM", "BASIC")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--ratio", type=float, default=0.3)
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for seed in (int(s) for s in args.seeds.split(",")):
        for strategy in STRATEGIES:
            d = summarise(args.config, [f"seed={seed}", f"failure.ratio={args.ratio}", f"dabnet.strategy={strategy}",
                                        "traffic.flows=0", "routing.routers=[dabr]"])["dabnet"]
            rows.append({"seed": seed, "strategy": strategy,
                         "iul_changes_per_round": round(d["iul_changes_per_round"], 4),
                         "end_vagrants": d["end_vagrants"], "end_blocks": d["end_blocks"],
                         "mean_fu_degree": round(d["mean_fu_degree"], 4)})
    emit(rows, args.out)


if __name__ == "__main__":
    main()
