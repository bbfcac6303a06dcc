"""Walker-delta shells with +Grid ISLs, circular-orbit propagation and GS visibility.

Conventions: spherical Earth, circular Keplerian orbits, ECI frame with the
Greenwich meridian on +x at t=0, and plane 0 / slot 0 on its ascending node
at t=0. Satellite ``plane * sats_per_plane + slot`` is the satellite id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

R_EARTH_KM = 6371.0
MU_EARTH = 398600.4418  # km^3 / s^2
OMEGA_EARTH = 7.2921159e-5  # rad / s, sidereal
C_KM_S = 299792.458

# grid_neighbors slot order
FORE, AFT, LEFT, RIGHT = 0, 1, 2, 3


@dataclass(frozen=True)
class ShellConfig:
    planes: int
    sats_per_plane: int
    altitude_km: float
    inclination_deg: float
    phase_offset: int = 1

    def __post_init__(self):
        if self.planes < 1 or self.sats_per_plane < 1:
            raise ValueError(f"need planes >= 1 and sats_per_plane >= 1, got {self.planes}x{self.sats_per_plane}")
        if not self.altitude_km > 0:
            raise ValueError(f"altitude_km must be positive, got {self.altitude_km}")
        if not 0 <= self.inclination_deg <= 180:
            raise ValueError(f"inclination_deg out of [0, 180]: {self.inclination_deg}")

    @property
    def n_sats(self) -> int:
        return self.planes * self.sats_per_plane

    @property
    def radius_km(self) -> float:
        return R_EARTH_KM + self.altitude_km

    @property
    def period_s(self) -> float:
        return 2 * math.pi * math.sqrt(self.radius_km ** 3 / MU_EARTH)


STARLINK_SHELL1 = ShellConfig(72, 22, 550.0, 53.0)
ONEWEB = ShellConfig(12, 49, 1200.0, 87.9)


@dataclass(frozen=True)
class GroundStation:
    id: str
    lat_deg: float
    lon_deg: float
    alt_km: float = 0.0
    min_elevation_deg: float = 25.0

    def __post_init__(self):
        if not -90 <= self.lat_deg <= 90:
            raise ValueError(f"{self.id}: latitude out of range: {self.lat_deg}")
        if not -180 < self.lon_deg <= 180:
            raise ValueError(f"{self.id}: longitude out of range: {self.lon_deg}")


@dataclass(frozen=True, eq=False)
class Topology:
    """Satellite set, undirected ISL list and the 4-slot +Grid adjacency.

    ``edges`` is an ``(E, 2)`` int array with ``u < v`` per row, sorted. Built
    either from a shell (``build_constellation``) or from a raw edge list
    (``Topology.from_edges``) for synthetic graphs.
    """

    n_sats: int
    edges: np.ndarray
    grid_neighbors: np.ndarray
    config: ShellConfig | None = None
    edge_index: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_edges(cls, n_sats: int, edges, config: ShellConfig | None = None,
                   grid_neighbors: np.ndarray | None = None) -> "Topology":
        norm = sorted({(min(u, v), max(u, v)) for u, v in edges if u != v})
        arr = np.array(norm, dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n_sats):
            raise ValueError("edge endpoint outside satellite range")
        if grid_neighbors is None:
            grid_neighbors = np.full((n_sats, 4), -1, dtype=np.int64)
        index = {(int(u), int(v)): i for i, (u, v) in enumerate(arr.tolist())}
        return cls(n_sats, arr, grid_neighbors, config, index)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_id(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        return self.edge_index[key]


def build_constellation(config: ShellConfig) -> Topology:
    P, S = config.planes, config.sats_per_plane
    grid = np.empty((P * S, 4), dtype=np.int64)
    edges = []
    for p in range(P):
        for s in range(S):
            sat = p * S + s
            grid[sat, FORE] = p * S + (s + 1) % S
            grid[sat, AFT] = p * S + (s - 1) % S
            grid[sat, LEFT] = ((p - 1) % P) * S + s
            grid[sat, RIGHT] = ((p + 1) % P) * S + s
            edges.append((sat, grid[sat, FORE]))
            edges.append((sat, grid[sat, RIGHT]))
    # with fewer than 3 planes or slots the wrap-around collapses duplicates / self-loops
    return Topology.from_edges(P * S, edges, config=config, grid_neighbors=grid)


def _orbital_elements(config: ShellConfig):
    P, S = config.planes, config.sats_per_plane
    plane = np.repeat(np.arange(P), S)
    slot = np.tile(np.arange(S), P)
    raan = 2 * np.pi * plane / P
    u0 = 2 * np.pi * slot / S + 2 * np.pi * config.phase_offset * plane / (P * S)
    return raan, u0


def positions_at(topology: Topology, t: float) -> np.ndarray:
    """ECI positions (km) of every satellite at ``t`` seconds, shape ``(N, 3)``."""
    cfg = topology.config
    if cfg is None:
        raise ValueError("topology has no shell config to propagate")
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    raan, u0 = _orbital_elements(cfg)
    n = 2 * np.pi / cfg.period_s
    u = u0 + n * t
    inc = math.radians(cfg.inclination_deg)
    cu, su = np.cos(u), np.sin(u)
    co, so = np.cos(raan), np.sin(raan)
    r = cfg.radius_km
    x = r * (co * cu - so * su * math.cos(inc))
    y = r * (so * cu + co * su * math.cos(inc))
    z = r * (su * math.sin(inc))
    return np.stack([x, y, z], axis=1)


def geodetic_to_eci(lat_deg: float, lon_deg: float, alt_km: float, t: float) -> np.ndarray:
    lat = math.radians(lat_deg)
    theta = math.radians(lon_deg) + OMEGA_EARTH * t
    r = R_EARTH_KM + alt_km
    return np.array([r * math.cos(lat) * math.cos(theta),
                     r * math.cos(lat) * math.sin(theta),
                     r * math.sin(lat)])


def elevation_deg(ground: np.ndarray, sats: np.ndarray) -> np.ndarray:
    """Elevation of each row of ``sats`` above the local horizon at ``ground``."""
    up = ground / np.linalg.norm(ground)
    d = np.atleast_2d(sats) - ground
    rng = np.linalg.norm(d, axis=1)
    sin_el = (d @ up) / rng
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def visible_from(ground: np.ndarray, positions: np.ndarray, min_elevation_deg: float) -> frozenset[int]:
    el = elevation_deg(ground, positions)
    return frozenset(np.flatnonzero(el >= min_elevation_deg).tolist())


def gsl_candidates(gs: GroundStation, topology: Topology, t: float,
                   positions: np.ndarray | None = None) -> frozenset[int]:
    if positions is None:
        positions = positions_at(topology, t)
    ground = geodetic_to_eci(gs.lat_deg, gs.lon_deg, gs.alt_km, t)
    return visible_from(ground, positions, gs.min_elevation_deg)


def great_circle_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dl = math.radians(lon2 - lon1)
    h = math.sin((p2 - p1) / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * R_EARTH_KM * math.asin(min(1.0, math.sqrt(h)))
