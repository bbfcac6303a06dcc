"""Intermittent ISL failures as per-edge periodic square waves."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .constellation import Topology


@dataclass(frozen=True)
class FailureConfig:
    failure_ratio: float = 0.0
    period: float = 200.0
    seed: int = 0
    down_range: tuple[float, float] = (0.3, 0.7)

    def __post_init__(self):
        if not 0 <= self.failure_ratio <= 1:
            raise ValueError(f"failure_ratio must lie in [0, 1], got {self.failure_ratio}")
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period}")
        lo, hi = self.down_range
        if not 0 <= lo <= hi <= 1:
            raise ValueError(f"bad down_range {self.down_range}")


@dataclass(frozen=True, eq=False)
class AvailabilitySchedule:
    """Square-wave availability per edge index of a topology.

    An affected edge is up while ``((t - phase) mod period) / period < duty``;
    unaffected edges are always up.
    """

    edges: np.ndarray
    period: np.ndarray
    duty: np.ndarray
    phase: np.ndarray
    affected: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def mask(self, t: float) -> np.ndarray:
        frac = np.mod(t - self.phase, self.period) / self.period
        return ~self.affected | (frac < self.duty)

    def to_records(self) -> list[dict]:
        rows = []
        for i, (u, v) in enumerate(self.edges.tolist()):
            rows.append({
                "edge": [u, v],
                "affected": bool(self.affected[i]),
                "period_s": float(self.period[i]),
                "duty_available": float(self.duty[i]),
                "phase_s": float(self.phase[i]),
            })
        return rows

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_records(), fh, indent=1)


def always_available(topology: Topology) -> AvailabilitySchedule:
    return schedule_failures(topology, FailureConfig(failure_ratio=0.0))


def schedule_failures(topology: Topology, cfg: FailureConfig) -> AvailabilitySchedule:
    E = topology.n_edges
    rng = np.random.default_rng(cfg.seed)
    n_affected = int(math.floor(cfg.failure_ratio * E + 0.5))
    order = rng.permutation(E)
    affected = np.zeros(E, dtype=bool)
    affected[order[:n_affected]] = True
    lo, hi = cfg.down_range
    down = rng.uniform(lo, hi, size=E)
    phase = rng.uniform(0.0, cfg.period, size=E)
    duty = np.where(affected, 1.0 - down, 1.0)
    period = np.full(E, float(cfg.period))
    return AvailabilitySchedule(topology.edges.copy(), period, duty, phase, affected)


def is_available(schedule: AvailabilitySchedule, e, t: float) -> bool:
    """Availability of edge ``e`` (index or ``(u, v)`` pair) at time ``t``."""
    if isinstance(e, tuple):
        u, v = e
        hits = np.flatnonzero((schedule.edges[:, 0] == min(u, v)) & (schedule.edges[:, 1] == max(u, v)))
        if not len(hits):
            raise KeyError(f"unknown edge {e}")
        i = int(hits[0])
    else:
        i = int(e)
        if not 0 <= i < schedule.n_edges:
            raise KeyError(f"unknown edge index {e}")
    if not schedule.affected[i]:
        return True
    frac = ((t - schedule.phase[i]) % schedule.period[i]) / schedule.period[i]
    return bool(frac < schedule.duty[i])
