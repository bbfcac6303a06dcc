"""Acceptance suite on the 588-satellite OneWeb shell.

Each test prints one ``PASS``/``FAIL`` line and then asserts the same verdict.
Runs are memoised per override set so criteria sharing a scenario pay for it once.
"""
import functools
import statistics
import subprocess
import sys
from pathlib import Path

import pytest

from lsnsim.config import load_config, with_overrides
from lsnsim.engine import run_scenario

ROOT = Path(__file__).resolve().parents[1]
SEEDS = (1, 2, 3, 4, 5)
BASE = load_config(ROOT / "configs" / "oneweb.yaml")

pytestmark = pytest.mark.acceptance


@functools.lru_cache(maxsize=None)
def summary(seed, *overrides):
    cfg = with_overrides(BASE, [f"seed={seed}", *overrides])
    return run_scenario(cfg, keep_traces=False).summary


def full(seed, ratio=0.3):
    return summary(seed, f"failure.ratio={ratio}")


def reach(s, router):
    return s["routers"][router]["reachability_pct"]


@pytest.fixture
def verdict(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {tag}: {detail}")
        assert ok, detail
    return emit


def test_c1_zero_failure_reachability(verdict):
    worst, faults, rows = 100.0, 0, []
    for policy in ("CTV", "MDV", "MTA"):
        vals = []
        for seed in SEEDS:
            s = summary(seed, "failure.ratio=0", f"routing.policy={policy}", "routing.routers=[dabr]")
            r = s["routers"]["dabr"]
            vals.append(r["reachability_pct"])
            faults += r["failed"]
        mean = statistics.fmean(vals)
        worst = min(worst, mean)
        rows.append(f"{policy}={mean:.2f}%")
    verdict("C1 zero-failure reachability", worst >= 99.5 and faults == 0,
            f"{' '.join(rows)}, routing faults={faults}")


def test_c2_severe_failure_resiliency(verdict):
    rows, ok = [], True
    for seed in SEEDS:
        s = full(seed)
        fs, gr = reach(s, "dabr"), reach(s, "greedy")
        good = fs >= 90 and 35 <= gr <= 70 and fs >= 1.5 * gr
        ok &= good
        rows.append(f"s{seed}:{fs:.1f}/{gr:.1f}{'' if good else '!'}")
    verdict("C2 severe-failure resiliency", ok, "full/greedy " + " ".join(rows))


def test_c3_ablation_ordering(verdict):
    wins = [0, 0, 0]
    rows = []
    for seed in SEEDS:
        groups = [[], [], [], []]
        for ratio in (0.2, 0.3):
            s = full(seed, ratio)
            rnd = summary(seed, f"failure.ratio={ratio}", "dabnet.strategy=RANDOM", "routing.routers=[dabr_nonbas]")
            groups[0].append(reach(s, "dabr"))
            groups[1].append(reach(s, "dabr_nonbas"))
            groups[2].append(reach(rnd, "dabr_nonbas"))
            groups[3].append(reach(s, "greedy"))
        m = [statistics.fmean(g) for g in groups]
        for k in range(3):
            wins[k] += m[k] > m[k + 1]
        rows.append("s%d:%s" % (seed, "/".join(f"{v:.1f}" for v in m)))
    verdict("C3 ablation ordering", all(w >= 4 for w in wins),
            f"wins={wins} of {len(SEEDS)} " + " ".join(rows))


def test_c4_overhead_ratio(verdict):
    ok, rows = True, []
    for seed in SEEDS:
        o = full(seed)["overhead"]
        ospf, aodv, bf = o["OSPF_LIKE"], o["AODV_LIKE"], o["BLOCKFLEX"]
        fib = bf["fib_updates"] / ospf["fib_updates"]
        msg = bf["control_messages"] / ospf["control_messages"]
        between = all(bf[k] <= aodv[k] <= ospf[k] for k in ("fib_updates", "control_messages"))
        ok &= fib <= 0.01 and msg <= 0.01 and between
        rows.append(f"s{seed}:fib={100 * fib:.3f}% msg={100 * msg:.3f}% aodv_between={between}")
    verdict("C4 overhead ratio", ok, " ".join(rows))


def test_c5_survivability_ordering(verdict):
    order_ok = vagrant_wins = degree_wins = 0
    rows = []
    for seed in SEEDS:
        d = {st: summary(seed, "failure.ratio=0.3", f"dabnet.strategy={st}", "traffic.flows=0",
                         "routing.routers=[dabr]")["dabnet"]
             for st in ("STATIC", "CQSBE", "RANDOM", "BASIC")}
        iul = [d[st]["iul_changes_per_round"] for st in ("STATIC", "CQSBE", "RANDOM", "BASIC")]
        order_ok += all(a < b for a, b in zip(iul, iul[1:]))
        vagrant_wins += d["CQSBE"]["end_vagrants"] < d["RANDOM"]["end_vagrants"]
        degree_wins += d["CQSBE"]["mean_fu_degree"] > d["RANDOM"]["mean_fu_degree"]
        rows.append("s%d:iul=%s vag=%d/%d deg=%.3f/%.3f" % (
            seed, "<".join(f"{v:.2f}" for v in iul), d["CQSBE"]["end_vagrants"], d["RANDOM"]["end_vagrants"],
            d["CQSBE"]["mean_fu_degree"], d["RANDOM"]["mean_fu_degree"]))
    verdict("C5 survivability ordering", min(order_ok, vagrant_wins, degree_wins) >= 4,
            f"iul_order={order_ok} vagrants={vagrant_wins} degree={degree_wins} of {len(SEEDS)} " + " ".join(rows))


def test_c6_jitter_reduction(verdict):
    others = ("dabr_nonbas", "greedy", "mhp", "sdp")
    fs = statistics.fmean(full(seed)["routers"]["dabr"]["jitter_s"] for seed in SEEDS)
    means = {x: statistics.fmean(full(seed)["routers"][x]["jitter_s"] for seed in SEEDS) for x in others}
    best = min(means, key=means.get)
    verdict("C6 jitter reduction", fs <= 0.5 * means[best],
            f"full={1e3 * fs:.2f}ms best other {best}={1e3 * means[best]:.2f}ms ratio={fs / means[best]:.2f}")


PROPERTY_NODES = [
    "tests/test_dabnet.py::test_partition_invariant_over_ten_thousand_rounds",
    "tests/test_dabnet.py::test_partition_invariant_property",
    "tests/test_dabnet.py::test_div_matches_oracle",
    "tests/test_dabnet.py::test_psi_matches_oracle",
    "tests/test_dabnet.py::test_closeness_matches_oracle",
    "tests/test_dabnet.py::test_iul_set_matches_oracle",
    "tests/test_routing.py::test_intra_block_route_matches_oracle",
    "tests/test_baselines.py::test_hops_matches_bfs_oracle",
    "tests/test_routing.py::test_nbas_complete_against_dfs_oracle",
    "tests/test_engine.py::test_deterministic_report",
    "tests/test_cli.py::test_run_byte_identical",
    "tests/test_engine.py::test_stretch_at_least_one",
    "tests/test_failure.py::test_time_average_equals_duty",
]


def test_c7_property_suites(verdict):
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_NODES],
                          cwd=ROOT, capture_output=True, text=True)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()
    verdict("C7 property suites", proc.returncode == 0, tail)


def test_c8_refresh_wave_periodicity(verdict):
    ok, rows = True, []
    for seed in SEEDS:
        s = full(seed)
        delta = s["config"]["routing"]["delta_s"]
        expected = [k * delta for k in range(1, s["steps"]) if k * delta < s["steps"]]
        for router, waves in s["pfs_refresh_waves"].items():
            good = waves == expected and s["pfs"][router]["lookup"] > 0
            ok &= good
            rows.append(f"s{seed}/{router}:{waves}")
    verdict("C8 refresh waves every delta", ok, " ".join(rows))
