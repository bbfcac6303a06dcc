"""Scenario configuration: dataclass sections, YAML loading, dotted overrides.

Schema (every key optional; defaults shown by the dataclasses below)::

    name: str
    seed: int                      # root seed; all randomness derives from it
    duration_s: float
    timestep_s: float
    constellation: {planes, sats_per_plane, altitude_km, inclination_deg, phase_offset}
    ground: {min_elevation_deg, cities}      # cities: CSV path, null = bundled table
    failure: {ratio, period_s, down_min, down_max}
    dabnet: {strategy, d_min, d_max, n_min, epsilon, center_prob,
             max_evolution_iters, init_rounds, div_floor}
    routing: {policy, n_max, delta_s, mdv_argmin, os3_probe_all, ttl, routers}
    traffic: {flows, min_duration_s, max_duration_s, gdp_share}
    overhead: {models, aodv_load_fraction}
"""

from __future__ import annotations

import dataclasses
import math
import zlib
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

ROUTERS = ("dabr", "dabr_nonbas", "greedy", "mhp", "sdp")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid scenario config:\n  " + "\n  ".join(problems))


@dataclass
class ConstellationSection:
    planes: int = 12
    sats_per_plane: int = 49
    altitude_km: float = 1200.0
    inclination_deg: float = 87.9
    phase_offset: int = 1


@dataclass
class GroundSection:
    min_elevation_deg: float = 25.0
    cities: str | None = None


@dataclass
class FailureSection:
    ratio: float = 0.0
    period_s: float = 200.0
    down_min: float = 0.3
    down_max: float = 0.7


@dataclass
class DabnetSection:
    strategy: str = "CQSBE"
    d_min: int = 1
    d_max: int = 3
    n_min: int = 2
    epsilon: float = 0.3
    center_prob: float = 0.1
    max_evolution_iters: int = 32
    init_rounds: int = 20
    div_floor: float = 1e-3


@dataclass
class RoutingSection:
    policy: str = "CTV"
    n_max: int = 5
    delta_s: float = 100.0
    mdv_argmin: bool = False
    os3_probe_all: bool = True
    ttl: int = 128
    routers: list[str] = field(default_factory=lambda: ["dabr"])


@dataclass
class TrafficSection:
    flows: int = 100
    min_duration_s: float = 60.0
    max_duration_s: float = 600.0
    gdp_share: float = 0.5


@dataclass
class OverheadSection:
    models: list[str] = field(default_factory=lambda: ["OSPF_LIKE", "AODV_LIKE", "BLOCKFLEX"])
    aodv_load_fraction: float = 0.5


@dataclass
class ScenarioConfig:
    name: str = "scenario"
    seed: int = 1
    duration_s: float = 300.0
    timestep_s: float = 1.0
    constellation: ConstellationSection = field(default_factory=ConstellationSection)
    ground: GroundSection = field(default_factory=GroundSection)
    failure: FailureSection = field(default_factory=FailureSection)
    dabnet: DabnetSection = field(default_factory=DabnetSection)
    routing: RoutingSection = field(default_factory=RoutingSection)
    traffic: TrafficSection = field(default_factory=TrafficSection)
    overhead: OverheadSection = field(default_factory=OverheadSection)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def derive_seed(self, stream: str) -> int:
        """Independent per-subsystem seed from the root seed and a stream name."""
        return derive_seed(self.seed, stream)


def derive_seed(root: int, stream: str) -> int:
    ss = np.random.SeedSequence([int(root), zlib.crc32(stream.encode())])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


_SECTIONS = {f.name: f.type for f in fields(ScenarioConfig)}
_SECTION_TYPES = {
    "constellation": ConstellationSection,
    "ground": GroundSection,
    "failure": FailureSection,
    "dabnet": DabnetSection,
    "routing": RoutingSection,
    "traffic": TrafficSection,
    "overhead": OverheadSection,
}


def from_dict(data: dict[str, Any]) -> ScenarioConfig:
    problems = []
    data = dict(data or {})
    kwargs = {}
    for key, value in data.items():
        if key not in _SECTIONS:
            problems.append(f"unknown key '{key}'")
        elif key in _SECTION_TYPES:
            cls = _SECTION_TYPES[key]
            if not isinstance(value, dict):
                problems.append(f"'{key}' must be a mapping")
                continue
            names = {f.name for f in fields(cls)}
            bad = sorted(set(value) - names)
            problems.extend(f"unknown key '{key}.{b}'" for b in bad)
            kwargs[key] = cls(**{k: v for k, v in value.items() if k in names})
        else:
            kwargs[key] = value
    if problems:
        raise ConfigError(problems)
    cfg = ScenarioConfig(**kwargs)
    validate(cfg)
    return cfg


def load_config(path, overrides: list[str] | None = None) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a mapping"])
    data = apply_overrides(data, overrides or [])
    cities = (data.get("ground") or {}).get("cities")
    if cities and not Path(cities).is_absolute():
        data.setdefault("ground", {})["cities"] = str((path.parent / cities).resolve())
    return from_dict(data)


def apply_overrides(data: dict, overrides: list[str]) -> dict:
    """Apply ``a.b=value`` strings; values are parsed as YAML scalars/lists."""
    data = _deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError([f"override '{item}' is not key=value"])
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = data
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError([f"override '{key}' descends into a scalar"])
        node[parts[-1]] = yaml.safe_load(raw)
    return data


def with_overrides(cfg: ScenarioConfig, overrides: list[str]) -> ScenarioConfig:
    return from_dict(apply_overrides(cfg.to_dict(), overrides))


def _deepcopy(d):
    if isinstance(d, dict):
        return {k: _deepcopy(v) for k, v in d.items()}
    if isinstance(d, list):
        return [_deepcopy(v) for v in d]
    return d


def validate(cfg: ScenarioConfig) -> None:
    p = []
    if not isinstance(cfg.seed, int):
        p.append("seed must be an integer")
    if not _pos(cfg.duration_s):
        p.append("duration_s must be > 0")
    if not _pos(cfg.timestep_s):
        p.append("timestep_s must be > 0")
    c = cfg.constellation
    if not (isinstance(c.planes, int) and c.planes >= 1):
        p.append("constellation.planes must be an integer >= 1")
    if not (isinstance(c.sats_per_plane, int) and c.sats_per_plane >= 1):
        p.append("constellation.sats_per_plane must be an integer >= 1")
    if not _pos(c.altitude_km):
        p.append("constellation.altitude_km must be > 0")
    if not (_num(c.inclination_deg) and 0 <= c.inclination_deg <= 180):
        p.append("constellation.inclination_deg must lie in [0, 180]")
    if not (_num(cfg.ground.min_elevation_deg) and -90 <= cfg.ground.min_elevation_deg <= 90):
        p.append("ground.min_elevation_deg must lie in [-90, 90]")
    if cfg.ground.cities is not None and not Path(cfg.ground.cities).exists():
        p.append(f"ground.cities: file not found: {cfg.ground.cities}")
    f = cfg.failure
    if not (_num(f.ratio) and 0 <= f.ratio <= 1):
        p.append("failure.ratio must lie in [0, 1]")
    if not _pos(f.period_s):
        p.append("failure.period_s must be > 0")
    if not (_num(f.down_min) and _num(f.down_max) and 0 <= f.down_min <= f.down_max <= 1):
        p.append("failure.down_min/down_max must satisfy 0 <= min <= max <= 1")
    d = cfg.dabnet
    if str(d.strategy).upper() not in ("CQSBE", "RANDOM", "STATIC", "BASIC"):
        p.append("dabnet.strategy must be CQSBE, RANDOM, STATIC or BASIC")
    if not (isinstance(d.d_min, int) and isinstance(d.d_max, int) and 1 <= d.d_min <= d.d_max):
        p.append("dabnet.d_min/d_max must satisfy 1 <= d_min <= d_max")
    if not (isinstance(d.n_min, int) and d.n_min >= 2):
        p.append("dabnet.n_min must be an integer >= 2")
    if not (_num(d.center_prob) and 0 < d.center_prob <= 1):
        p.append("dabnet.center_prob must lie in (0, 1]")
    if not (_num(d.epsilon) and d.epsilon >= 0):
        p.append("dabnet.epsilon must be >= 0")
    if not (isinstance(d.init_rounds, int) and d.init_rounds >= 0):
        p.append("dabnet.init_rounds must be an integer >= 0")
    if not (isinstance(d.max_evolution_iters, int) and d.max_evolution_iters >= 1):
        p.append("dabnet.max_evolution_iters must be an integer >= 1")
    r = cfg.routing
    if str(r.policy).upper() not in ("CTV", "MDV", "MTA"):
        p.append("routing.policy must be CTV, MDV or MTA")
    if not (isinstance(r.n_max, int) and r.n_max >= 0):
        p.append("routing.n_max must be an integer >= 0")
    if not (_num(r.delta_s) and r.delta_s >= 0):
        p.append("routing.delta_s must be >= 0 (.inf allowed)")
    if not (isinstance(r.ttl, int) and r.ttl >= 0):
        p.append("routing.ttl must be an integer >= 0")
    routers = r.routers if isinstance(r.routers, list) else [r.routers]
    for name in routers:
        if name not in ROUTERS:
            p.append(f"routing.routers: unknown router '{name}' (choose from {', '.join(ROUTERS)})")
    t = cfg.traffic
    if not (isinstance(t.flows, int) and t.flows >= 0):
        p.append("traffic.flows must be an integer >= 0")
    if not (_pos(t.min_duration_s) and _num(t.max_duration_s) and t.min_duration_s <= t.max_duration_s):
        p.append("traffic.min_duration_s/max_duration_s must satisfy 0 < min <= max")
    if not (_num(t.gdp_share) and 0 <= t.gdp_share <= 1):
        p.append("traffic.gdp_share must lie in [0, 1]")
    for m in cfg.overhead.models:
        if m not in ("OSPF_LIKE", "AODV_LIKE", "BLOCKFLEX"):
            p.append(f"overhead.models: unknown model '{m}'")
    if not (_num(cfg.overhead.aodv_load_fraction) and 0 < cfg.overhead.aodv_load_fraction <= 1):
        p.append("overhead.aodv_load_fraction must lie in (0, 1]")
    if p:
        raise ConfigError(p)


def _num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and not (isinstance(x, float) and math.isnan(x))


def _pos(x) -> bool:
    return _num(x) and x > 0
