"""Convergence overhead of the three control-plane models on one event stream."""
import argparse

from _common import DEFAULT_CONFIG, emit, summarise


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=DEFAULT_CONFIG)
    ap.add_argument("--ratios", default="0.1,0.2,0.3")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = []
    for ratio in (float(r) for r in args.ratios.split(",")):
        s = summarise(args.config, [f"seed={args.seed}", f"failure.ratio={ratio}", "routing.routers=[dabr]"])
        ospf = s["overhead"]["OSPF_LIKE"]
        for model, o in s["overhead"].items():
            rows.append({
                "failure_ratio": ratio, "model": model,
                "fib_updates": o["fib_updates"], "control_messages": o["control_messages"],
                "fib_pct_of_ospf": round(100 * o["fib_updates"] / ospf["fib_updates"], 4),
                "msg_pct_of_ospf": round(100 * o["control_messages"] / ospf["control_messages"], 4),
            })
    emit(rows, args.out)


if __name__ == "__main__":
    main()
