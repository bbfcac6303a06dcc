"""Comparison routers and analytic convergence-overhead models."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Adjacency, bfs_distances, lexicographic_min_path
from .routing import GeoPolicy, egress_score


class Metric(str, enum.Enum):
    HOPS = "HOPS"
    DISTANCE = "DISTANCE"


class GreedyOutcome(str, enum.Enum):
    DELIVERED = "DELIVERED"
    DEAD_END = "DEAD_END"


def _dijkstra(adj: Adjacency, src: int, positions: np.ndarray, stop_at: float = math.inf):
    dist = {src: 0.0}
    parent = {src: None}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if d > stop_at:
            break
        done.add(u)
        pu = positions[u]
        for v in adj[u]:
            nd = d + float(np.linalg.norm(positions[v] - pu))
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent, done


def _walk_back(parent, node) -> list[int]:
    out = []
    while node is not None:
        out.append(node)
        node = parent[node]
    return out[::-1]


def shortest_path(adj: Adjacency, src: int, dst: int, metric: Metric = Metric.HOPS,
                  positions: np.ndarray | None = None) -> list[int] | None:
    """Optimal path or ``None`` when ``dst`` is unreachable. HOPS ties break lexicographically."""
    metric = Metric(metric)
    if metric is Metric.HOPS:
        return lexicographic_min_path(adj, src, dst)
    if positions is None:
        raise ValueError("DISTANCE metric needs positions")
    dist, parent, done = _dijkstra(adj, src, positions)
    if dst not in done:
        return None
    return _walk_back(parent, dst)


def path_to_ground(adj: Adjacency, src: int, exits: Iterable[int], metric: Metric, positions: np.ndarray,
                   dst_pos: np.ndarray) -> list[int] | None:
    """Best ISL path from ``src`` to any satellite in ``exits``.

    HOPS: fewest hops, then shortest downlink, then lowest id. DISTANCE:
    minimum ISL length plus downlink.
    """
    exits = frozenset(exits)
    if not exits:
        return None
    metric = Metric(metric)
    down = {x: float(np.linalg.norm(positions[x] - dst_pos)) for x in exits}
    if metric is Metric.HOPS:
        dist = bfs_distances(adj, src)
        reach = [x for x in exits if x in dist]
        if not reach:
            return None
        target = min(reach, key=lambda x: (dist[x], down[x], x))
        return lexicographic_min_path(adj, src, target)
    dist, parent, done = _dijkstra(adj, src, positions)
    reach = [x for x in exits if x in done]
    if not reach:
        return None
    target = min(reach, key=lambda x: (dist[x] + down[x], x))
    return _walk_back(parent, target)


@dataclass(frozen=True)
class GreedyResult:
    outcome: GreedyOutcome
    path: tuple[int, ...]

    @property
    def delivered(self) -> bool:
        return self.outcome is GreedyOutcome.DELIVERED


def greedy_geo_baseline(src_sat: int, dst_pos: np.ndarray, adj: Adjacency, positions: np.ndarray,
                        policy: GeoPolicy, dst_visible: Iterable[int], hop_budget: int = 128,
                        mdv_argmin: bool = False) -> GreedyResult:
    """Satellite-level geographic greedy walk without any protection.

    Moves to the best-scored neighbour only if it is strictly closer to the
    destination; otherwise stops at a local minimum.
    """
    policy = GeoPolicy(policy)
    dst_visible = frozenset(dst_visible)
    dst_pos = np.asarray(dst_pos, dtype=float)
    cur = src_sat
    path = [cur]
    for hop in range(hop_budget + 1):
        if cur in dst_visible:
            return GreedyResult(GreedyOutcome.DELIVERED, tuple(path))
        if hop == hop_budget or not adj[cur]:
            break
        rc = positions[cur]
        best = min(adj[cur], key=lambda v: (-egress_score(policy, rc, positions[v], dst_pos, mdv_argmin), v))
        if np.linalg.norm(positions[best] - dst_pos) >= np.linalg.norm(rc - dst_pos):
            break
        cur = best
        path.append(cur)
    return GreedyResult(GreedyOutcome.DEAD_END, tuple(path))


# ---------------------------------------------------------------- overhead accounting

class Protocol(str, enum.Enum):
    OSPF_LIKE = "OSPF_LIKE"
    AODV_LIKE = "AODV_LIKE"
    BLOCKFLEX = "BLOCKFLEX"


@dataclass(frozen=True)
class OverheadModel:
    protocol: Protocol
    load_fraction: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if not 0 < self.load_fraction <= 1:
            raise ValueError(f"load_fraction must lie in (0, 1], got {self.load_fraction}")


@dataclass(frozen=True)
class OverheadCounts:
    fib_updates: float = 0.0
    control_messages: float = 0.0

    def __add__(self, other: "OverheadCounts") -> "OverheadCounts":
        return OverheadCounts(self.fib_updates + other.fib_updates,
                              self.control_messages + other.control_messages)


@dataclass(frozen=True)
class OverheadEvent:
    """One entry of the overhead audit stream.

    kinds: ``isl_flip`` / ``gsl_change`` (nodes = |S|, edges = available ISLs),
    ``flow_arrival`` / ``path_break`` (nodes = flood scope, path_len = route
    hops), ``block_evolution`` (nodes = block size, edges = internal links).
    """

    t: float
    kind: str
    nodes: int = 0
    edges: int = 0
    path_len: int = 0

    def as_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, "nodes": self.nodes, "edges": self.edges, "path_len": self.path_len}


TOPOLOGY_KINDS = frozenset({"isl_flip", "gsl_change"})
ROUTE_KINDS = frozenset({"flow_arrival", "path_break"})


def event_cost(model: OverheadModel, ev: OverheadEvent) -> OverheadCounts:
    p = model.protocol
    if p is Protocol.OSPF_LIKE and ev.kind in TOPOLOGY_KINDS:
        return OverheadCounts(ev.nodes, 2 * ev.edges)
    if p is Protocol.AODV_LIKE and ev.kind in ROUTE_KINDS:
        return OverheadCounts(ev.path_len * model.load_fraction, ev.nodes * model.load_fraction)
    if p is Protocol.BLOCKFLEX and ev.kind == "block_evolution":
        return OverheadCounts(ev.nodes, 2 * ev.edges)
    return OverheadCounts()


def convergence_overhead(model: OverheadModel, events: Iterable[OverheadEvent]) -> OverheadCounts:
    total = OverheadCounts()
    for ev in events:
        total = total + event_cost(model, ev)
    return total
