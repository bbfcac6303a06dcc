"""In-process name service: flat identifiers resolved to geodetic locators."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field


class ResolutionError(LookupError):
    """Identifier has no binding; distinct from a transport failure."""


@dataclass(frozen=True)
class Locator:
    lat_deg: float
    lon_deg: float
    alt_km: float = 0.0

    def __post_init__(self):
        if not -90 <= self.lat_deg <= 90 or not -180 < self.lon_deg <= 180:
            raise ValueError(f"invalid geodetic locator {self}")


@dataclass(frozen=True)
class Binding:
    locator: Locator
    last_update_t: float


@dataclass
class GnsDirectory:
    bindings: dict[str, Binding] = field(default_factory=dict)
    leases: dict[str, str] = field(default_factory=dict)
    _counter: itertools.count = field(default_factory=lambda: itertools.count(1), repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def from_stations(cls, stations, t: float = 0.0) -> "GnsDirectory":
        d = cls()
        for gs in stations:
            if gs.id in d.bindings:
                raise ValueError(f"duplicate identifier {gs.id!r}")
            d.bindings[gs.id] = Binding(Locator(gs.lat_deg, gs.lon_deg, gs.alt_km), t)
        return d


def gns_resolve(directory: GnsDirectory, src_identifier: str, dst_identifier: str,
                t: float) -> tuple[Locator, str]:
    binding = directory.bindings.get(dst_identifier)
    if binding is None:
        raise ResolutionError(f"unbound identifier {dst_identifier!r}")
    with directory._lock:
        token = f"lease-{next(directory._counter):08d}"
        directory.leases[src_identifier] = token
    return binding.locator, token


def gns_update(directory: GnsDirectory, identifier: str, locator: Locator, t: float) -> GnsDirectory:
    with directory._lock:
        if identifier not in directory.bindings:
            raise KeyError(f"unknown identifier {identifier!r}")
        directory.bindings[identifier] = Binding(locator, t)
    return directory
