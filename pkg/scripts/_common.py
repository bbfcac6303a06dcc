"""Shared helpers for the experiment scripts."""
import csv
import sys
from pathlib import Path

from lsnsim.config import load_config, with_overrides
from lsnsim.engine import run_scenario

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_CONFIG = ROOT / "configs" / "oneweb.yaml"


def summarise(config, overrides):
    cfg = with_overrides(load_config(config), overrides)
    return run_scenario(cfg, keep_traces=False).summary


def emit(rows, out=None):
    if not rows:
        return
    fh = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if out:
            fh.close()
