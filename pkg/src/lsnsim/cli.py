"""Command-line entry point: ``lsnsim validate|run|sweep|report``.

Output layout of ``run`` (stable file names)::

    <out>/report.json           MetricsReport summary
    <out>/traces.jsonl          one JSON object per delivery attempt
    <out>/audit.csv             overhead event stream (t, kind, nodes, edges, path_len)
    <out>/tables/<name>.csv     plot-ready tables (latency, jitter, pfs_counters, dabnet_rounds)

``sweep`` writes one such directory per axis value plus ``<out>/sweep.csv``.
The output root defaults to ``$LSNSIM_OUT`` (or ``./lsnsim-out``) joined with the scenario name.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

import yaml

from .config import ConfigError, ScenarioConfig, derive_seed, load_config, with_overrides
from .engine import MetricsReport, run_scenario

ENV_OUT = "LSNSIM_OUT"
EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2

SWEEP_COLUMNS = ("router", "attempts", "delivered", "failed", "coverage_gap", "reachability_pct",
                 "reachability_routable_pct", "flow_reachability_pct", "mean_stretch", "jitter_s",
                 "mean_latency_s")


def _err(msg: str) -> None:
    print(f"lsnsim: {msg}", file=sys.stderr)


def output_dir(cfg: ScenarioConfig, out: str | None) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(ENV_OUT, "lsnsim-out")) / cfg.name


def write_report(report: MetricsReport, out: Path) -> None:
    """Write all artifacts into ``out`` atomically: a staging dir is renamed into place."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        with open(stage / "traces.jsonl", "w") as fh:
            for row in report.traces:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        _write_csv(stage / "audit.csv", [asdict(e) for e in report.audit],
                   ["t", "kind", "nodes", "edges", "path_len"])
        (stage / "tables").mkdir()
        for name, rows in report.tables.items():
            _write_csv(stage / "tables" / f"{name}.csv", rows)
        (stage / "report.json").write_text(report.to_json() + "\n")
        if out.exists():
            shutil.rmtree(out)
        stage.rename(out)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise


def _write_csv(path: Path, rows: list[dict], header: list[str] | None = None) -> None:
    if header is None:
        header = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        w.writerows(rows)


def _load(args) -> ScenarioConfig:
    return load_config(args.config, args.set)


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(f"ok: {args.config} (scenario '{cfg.name}', seed {cfg.seed})")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    out = output_dir(cfg, args.out)
    report = run_scenario(cfg)
    write_report(report, out)
    print(f"wrote {out / 'report.json'}")
    _print_summary(report.summary)
    return EXIT_OK


def parse_values(raw: str) -> list:
    return [yaml.safe_load(v) for v in raw.split(",") if v.strip()]


def sweep_point(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """Config for one sweep point; the seed depends only on the root seed and the value."""
    token = json.dumps(value, sort_keys=True)
    point = with_overrides(cfg, [f"{axis}={token}"])
    point.seed = derive_seed(cfg.seed, f"sweep:{axis}={token}")
    point.name = f"{cfg.name}-{axis}={_label(value)}"
    return point


def _label(value) -> str:
    return str(value).replace("/", "_").replace(" ", "")


def _run_point(args: tuple) -> tuple:
    point, out = args
    report = run_scenario(point)
    write_report(report, out)
    return report.summary


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = parse_values(args.values)
    if not values:
        _err("sweep needs at least one value in --values")
        return EXIT_CONFIG
    points = [sweep_point(cfg, args.axis, v) for v in values]
    out = output_dir(cfg, args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(p, out / f"{args.axis}={_label(v)}") for p, v in zip(points, values)]
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs) as ex:
                summaries = list(ex.map(_run_point, jobs))
        else:
            summaries = [_run_point(j) for j in jobs]
        rows = sweep_rows(args.axis, values, summaries)
        _write_csv(out / "sweep.csv", rows, [args.axis, "seed", *SWEEP_COLUMNS, *_overhead_cols(summaries)])
    except BaseException:
        for _, d in jobs:
            shutil.rmtree(d, ignore_errors=True)
        (out / "sweep.csv").unlink(missing_ok=True)
        raise
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _overhead_cols(summaries) -> list[str]:
    cols = []
    for s in summaries:
        for m in s["overhead"]:
            for k in ("fib_updates", "control_messages"):
                if f"{m}_{k}" not in cols:
                    cols.append(f"{m}_{k}")
    return cols


def sweep_rows(axis: str, values: list, summaries: list[dict]) -> list[dict]:
    rows = []
    for v, s in zip(values, summaries):
        extra = {f"{m}_{k}": oc[k] for m, oc in s["overhead"].items() for k in ("fib_updates", "control_messages")}
        for router, rs in s["routers"].items():
            row = {axis: v, "seed": s["seed"], "router": router}
            row.update({k: rs[k] for k in SWEEP_COLUMNS[1:]})
            row.update(extra)
            rows.append(row)
    return rows


def cmd_report(args) -> int:
    path = Path(args.path)
    if (path / "sweep.csv").exists():
        with open(path / "sweep.csv") as fh:
            sys.stdout.write(fh.read())
        return EXIT_OK
    if path.is_dir():
        path = path / "report.json"
    if not path.exists():
        _err(f"no report found at {path}")
        return EXIT_RUNTIME
    _print_summary(json.loads(path.read_text()))
    return EXIT_OK


def _fmt(x) -> str:
    if x is None:
        return "-"
    return f"{x:.4g}" if isinstance(x, float) else str(x)


def _print_summary(s: dict) -> None:
    print(f"scenario {s['scenario']}  seed {s['seed']}  steps {s['steps']}  flows {s['flows']}")
    print(f"{'router':<12} {'reach%':>8} {'routable%':>10} {'stretch':>8} {'jitter_s':>9} {'attempts':>9}")
    for name, r in s["routers"].items():
        print(f"{name:<12} {_fmt(r['reachability_pct']):>8} {_fmt(r['reachability_routable_pct']):>10} "
              f"{_fmt(r['mean_stretch']):>8} {_fmt(r['jitter_s']):>9} {r['attempts']:>9}")
    for m, oc in s["overhead"].items():
        print(f"overhead {m:<10} fib_updates {oc['fib_updates']:>10}  control_messages {oc['control_messages']:>10}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsnsim", description="LEO satellite network routing simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", required=True, help="scenario YAML file")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted-key override, repeatable (e.g. failure.ratio=0.3)")
        if out:
            sp.add_argument("--out", help=f"output directory (default ${ENV_OUT}/<name>)")

    common(sub.add_parser("validate", help="check a config and exit"), out=False)
    common(sub.add_parser("run", help="run one scenario"))
    sw = sub.add_parser("sweep", help="run one scenario per axis value")
    common(sw)
    sw.add_argument("--axis", required=True, help="dotted config key to vary")
    sw.add_argument("--values", required=True, help="comma-separated values")
    sw.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    rp = sub.add_parser("report", help="print a run or sweep directory")
    rp.add_argument("path")
    return p


COMMANDS = {"validate": cmd_validate, "run": cmd_run, "sweep": cmd_sweep, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    except FileNotFoundError as e:
        _err(str(e))
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - surface any runtime failure as an exit status
        _err(f"run failed: {type(e).__name__}: {e}")
        return EXIT_RUNTIME
