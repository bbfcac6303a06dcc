"""Hierarchical routing over the block partition.

Inter-unit forwarding is geographic (three egress criteria), intra-block
forwarding follows per-block min-hop FIBs, dead ends are recovered by bounded
backward NACK signalling over per-flow protection stacks, and ground stations
pick their source satellite from an RTT-ordered queue.
"""

from __future__ import annotations

import enum
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .constellation import C_KM_S
from .dabnet import DabnetState
from .graph import Adjacency, bfs_distances
from .naming import Locator


class GeoPolicy(str, enum.Enum):
    CTV = "CTV"
    MDV = "MDV"
    MTA = "MTA"


class Outcome(str, enum.Enum):
    DELIVERED = "DELIVERED"
    FAILED = "FAILED"


class RoutingError(ValueError):
    pass


class StaleFibError(RoutingError):
    """Intra-block FIB no longer connects the requested endpoints."""


class SourceNotVisibleError(RoutingError):
    pass


class CoverageGapError(RoutingError):
    """No satellite is visible from the ground station."""


@dataclass(frozen=True)
class Dataflow:
    flow_id: int
    src_gs: str
    dst_gs: str
    start_t: float
    end_t: float
    src_identifier: str = ""
    dst_identifier: str = ""
    dst_locator: Locator | None = None

    def __post_init__(self):
        if self.src_gs == self.dst_gs:
            raise ValueError(f"flow {self.flow_id}: source and destination coincide")
        if not self.start_t < self.end_t:
            raise ValueError(f"flow {self.flow_id}: empty activity window")

    def active(self, t: float) -> bool:
        return self.start_t <= t < self.end_t


@dataclass(frozen=True)
class Egress:
    u: int
    v: int
    next_fu: int
    score: float
    demoted: bool = False

    @property
    def link(self) -> tuple[int, int]:
        return (self.u, self.v)


@dataclass(frozen=True)
class DeliveryResult:
    outcome: Outcome
    fu_path: tuple[int, ...]
    sat_path: tuple[int, ...]
    latency_s: float
    rediscoveries: int = 0
    nacks: int = 0
    path_km: float = 0.0
    fu_trace: tuple[int, ...] = ()

    @property
    def delivered(self) -> bool:
        return self.outcome is Outcome.DELIVERED


def _failed(fu_path=(), trace=(), rediscoveries=0, nacks=0) -> DeliveryResult:
    return DeliveryResult(Outcome.FAILED, tuple(fu_path), (), math.inf, rediscoveries, nacks, math.inf, tuple(trace))


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Everything forwarding needs at one instant; shared read-only by all flows."""

    t: float
    state: DabnetState
    adj: Adjacency
    positions: np.ndarray


# ---------------------------------------------------------------- scoring

def egress_score(policy: GeoPolicy, r_u: np.ndarray, r_v: np.ndarray, r_dst: np.ndarray,
                 mdv_argmin: bool = False) -> float:
    """Larger is better for every policy."""
    link = r_v - r_u
    post = float(np.linalg.norm(r_v - r_dst))
    if policy is GeoPolicy.CTV:
        return -post
    to_dst = r_dst - r_u
    denom = float(np.linalg.norm(link) * np.linalg.norm(to_dst))
    cos = float(link @ to_dst) / denom if denom > 0 else 0.0
    if policy is GeoPolicy.MDV:
        return -cos if mdv_argmin else cos
    if post == 0.0:
        return math.inf
    return cos / post


def unit_links(fu: int, state: DabnetState, adj: Adjacency) -> list[tuple[int, int]]:
    unit_of = state.unit_of
    return [(u, v) for u in sorted(state.members(fu)) for v in adj[u]
            if unit_of[v] != fu and unit_of[v] >= 0]


def rank_egress(fu: int, dst_pos: np.ndarray, state: DabnetState, adj: Adjacency, positions: np.ndarray,
                policy: GeoPolicy, prev_fu: int | None = None, mdv_argmin: bool = False) -> list[Egress]:
    """All inter-unit links of ``fu`` best-first; links back to ``prev_fu`` go last."""
    policy = GeoPolicy(policy)
    dst_pos = np.asarray(dst_pos, dtype=float)
    out = []
    for u, v in unit_links(fu, state, adj):
        nxt = state.unit_of[v]
        score = egress_score(policy, positions[u], positions[v], dst_pos, mdv_argmin)
        out.append(Egress(u, v, nxt, score, prev_fu is not None and nxt == prev_fu))
    out.sort(key=lambda e: (e.demoted, -e.score, e.u, e.v))
    return out


# ---------------------------------------------------------------- intra-block

class BlockFib:
    """Min-hop next-hop table for one block, built from its available internal links."""

    def __init__(self, members: frozenset[int], adj: Adjacency):
        self.members = frozenset(members)
        self._adj = adj
        self._dist = {d: bfs_distances(adj, d, self.members) for d in self.members}

    def route(self, ingress: int, egress: int) -> list[int]:
        if ingress not in self.members or egress not in self.members:
            raise RoutingError(f"{ingress}->{egress}: endpoint outside block")
        dist = self._dist[egress]
        if ingress not in dist:
            raise StaleFibError(f"no route {ingress}->{egress} inside block")
        path = [ingress]
        u = ingress
        while u != egress:
            want = dist[u] - 1
            u = min(v for v in self._adj[u] if dist.get(v) == want)
            path.append(u)
        return path


def block_signature(members: frozenset[int], adj: Adjacency) -> tuple:
    return tuple((u, tuple(v for v in adj[u] if v in members)) for u in sorted(members))


def intra_block_route(block, adj: Adjacency, ingress: int, egress: int) -> list[int]:
    members = block.members if hasattr(block, "members") else frozenset(block)
    return BlockFib(members, adj).route(ingress, egress)


# ---------------------------------------------------------------- caches

@dataclass
class ProtectionStack:
    entries: list[Egress]
    last_refresh_t: float
    upstream: int | None = None
    popped: set[tuple[int, int]] = field(default_factory=set)

    def live(self) -> list[Egress]:
        return [e for e in self.entries if e.link not in self.popped]

    def pop(self, link: tuple[int, int]) -> None:
        self.popped.add(link)


@dataclass
class SourceQueue:
    rtt: dict[int, float] = field(default_factory=dict)
    prev_visible: frozenset[int] = frozenset()
    pending: set[int] = field(default_factory=set)

    def ordered(self) -> list[tuple[int, float]]:
        return sorted(self.rtt.items(), key=lambda kv: (kv[1], kv[0]))


@dataclass
class RoutingCaches:
    """Per-(unit, flow) protection stacks, per-(GS, flow) source queues and block FIBs.

    ``counters[t]`` tallies forwarding decisions made at step ``t``: ``init``
    (stack built on demand), ``refresh`` (periodic recompute), ``lookup``
    (cached stack reused).
    """

    delta: float = 100.0
    pfs: dict[tuple[int, int], ProtectionStack] = field(default_factory=dict)
    spq: dict[tuple[str, int], SourceQueue] = field(default_factory=dict)
    fibs: dict[int, tuple[tuple, BlockFib]] = field(default_factory=dict)
    fib_rebuilds: int = 0
    counters: dict[float, Counter] = field(default_factory=lambda: defaultdict(Counter))

    def stamp(self, t: float) -> float:
        if self.delta > 0 and math.isfinite(self.delta):
            return math.floor(t / self.delta + 1e-9) * self.delta
        return t

    def is_stale(self, stack: ProtectionStack, t: float) -> bool:
        if self.delta <= 0:
            return True
        return stack.last_refresh_t <= t - self.delta + 1e-9

    def fib(self, fu: int, members: frozenset[int], adj: Adjacency) -> BlockFib:
        sig = block_signature(members, adj)
        hit = self.fibs.get(fu)
        if hit is not None and hit[0] == sig:
            return hit[1]
        fib = BlockFib(members, adj)
        self.fibs[fu] = (sig, fib)
        self.fib_rebuilds += 1
        return fib

    def queue(self, gs: str, flow_id: int) -> SourceQueue:
        return self.spq.setdefault((gs, flow_id), SourceQueue())

    def drop_flow(self, flow_id: int) -> None:
        for key in [k for k in self.pfs if k[1] == flow_id]:
            del self.pfs[key]
        for key in [k for k in self.spq if k[1] == flow_id]:
            del self.spq[key]


def refresh_caches(caches: RoutingCaches, snap: Snapshot, dst_positions: Mapping[int, np.ndarray],
                   policy: GeoPolicy, mdv_argmin: bool = False) -> RoutingCaches:
    """Stateless phase: rebuild every stale protection stack from the current snapshot.

    Stacks of units that no longer exist, or of flows missing from
    ``dst_positions``, are dropped.
    """
    state = snap.state
    t = snap.t
    for key in sorted(caches.pfs):
        fu, flow_id = key
        stack = caches.pfs[key]
        alive = (fu in state.blocks) or (fu < state.n_sats and fu in state.vagrants)
        if not alive or flow_id not in dst_positions:
            del caches.pfs[key]
            continue
        if not caches.is_stale(stack, t):
            continue
        entries = rank_egress(fu, dst_positions[flow_id], state, snap.adj, snap.positions, policy,
                              stack.upstream, mdv_argmin)
        caches.pfs[key] = ProtectionStack(entries, caches.stamp(t), stack.upstream)
        caches.counters[t]["refresh"] += 1
    live_units = set(state.blocks)
    for fu in [f for f in caches.fibs if f not in live_units]:
        del caches.fibs[fu]
    return caches


# ---------------------------------------------------------------- forwarding

@dataclass
class _Frame:
    fu: int
    ingress: int
    via: Egress | None
    prev: int | None
    stack: ProtectionStack | None = None
    after_nack: bool = False
    protecting: bool = False
    reach: float | None = None


def _acquire_stack(caches: RoutingCaches, snap: Snapshot, fu: int, flow_id: int, dst_pos: np.ndarray,
                   policy: GeoPolicy, prev: int | None, mdv_argmin: bool) -> ProtectionStack:
    key = (fu, flow_id)
    stack = caches.pfs.get(key)
    t = snap.t
    if stack is None or caches.is_stale(stack, t) or not stack.live():
        entries = rank_egress(fu, dst_pos, snap.state, snap.adj, snap.positions, policy, prev, mdv_argmin)
        stack = ProtectionStack(entries, caches.stamp(t), prev)
        caches.pfs[key] = stack
        caches.counters[t]["init"] += 1
    else:
        stack.upstream = prev
        caches.counters[t]["lookup"] += 1
    return stack


def _link_alive(e: Egress, fu: int, state: DabnetState, adj: Adjacency) -> bool:
    unit_of = state.unit_of
    return unit_of[e.u] == fu and e.v in adj[e.u] and unit_of[e.v] not in (fu, -1)


def _segment_km(path: list[int], positions: np.ndarray) -> float:
    if len(path) < 2:
        return 0.0
    p = positions[path]
    return float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())


def _intra(caches: RoutingCaches, snap: Snapshot, fu: int, a: int, b: int) -> list[int]:
    if a == b:
        return [a]
    members = snap.state.members(fu)
    return caches.fib(fu, members, snap.adj).route(a, b)


def _finish(frames: list[_Frame], exits: Iterable[int], snap: Snapshot, caches: RoutingCaches,
            src_pos: np.ndarray, dst_pos: np.ndarray, rediscoveries: int, nacks: int,
            trace: list[int]) -> DeliveryResult:
    pos = snap.positions
    sats: list[int] = []
    for cur, nxt in zip(frames, frames[1:]):
        sats.extend(_intra(caches, snap, cur.fu, cur.ingress, nxt.via.u))
    last = frames[-1]
    best = None
    for x in sorted(exits):
        seg = _intra(caches, snap, last.fu, last.ingress, x)
        cost = _segment_km(seg, pos) + float(np.linalg.norm(pos[x] - dst_pos))
        if best is None or cost < best[0]:
            best = (cost, seg)
    sats.extend(best[1])
    km = (float(np.linalg.norm(pos[sats[0]] - src_pos)) + _segment_km(sats, pos)
          + float(np.linalg.norm(pos[sats[-1]] - dst_pos)))
    return DeliveryResult(Outcome.DELIVERED, tuple(f.fu for f in frames), tuple(sats), km / C_KM_S,
                          rediscoveries, nacks, km, tuple(trace))


def _unit_reach(state: DabnetState, fu: int, positions: np.ndarray, dst_pos: np.ndarray) -> float:
    """Distance to the destination of the unit's closest member."""
    members = sorted(state.members(fu))
    return float(np.linalg.norm(positions[members] - dst_pos, axis=1).min())


def deliver_with_nbas(flow: Dataflow, src_sat: int, snap: Snapshot, policy: GeoPolicy, caches: RoutingCaches,
                      n_max: int, *, src_pos: np.ndarray, dst_pos: np.ndarray, dst_visible: frozenset[int],
                      src_visible: frozenset[int] | None = None, ttl: int = 128,
                      mdv_argmin: bool = False) -> DeliveryResult:
    """Forward one datagram of ``flow`` from ``src_sat`` unit by unit.

    Primary forwarding takes the top live entry of the unit's protection
    stack when it leads to an unvisited unit and makes geographic progress
    (its far satellite is strictly closer to the destination than every member
    of the current unit). Otherwise the unit is a dead end. With budget left
    (``nacks < n_max``) a dead-end unit first falls back to its own remaining
    entries, then sends a NACK upstream, where the parent pops the entry that
    led there and tries its next one. Each NACK hop costs one unit of
    ``n_max``; with ``n_max = 0`` this is plain greedy forwarding over units.
    """
    if src_visible is not None and src_sat not in src_visible:
        raise SourceNotVisibleError(f"satellite {src_sat} not visible from {flow.src_gs}")
    policy = GeoPolicy(policy)
    state = snap.state
    unit_of = state.unit_of
    pos = snap.positions
    dst_pos = np.asarray(dst_pos, dtype=float)
    if src_sat in dst_visible:
        km = float(np.linalg.norm(pos[src_sat] - src_pos) + np.linalg.norm(pos[src_sat] - dst_pos))
        fu = unit_of[src_sat]
        return DeliveryResult(Outcome.DELIVERED, (fu,), (src_sat,), km / C_KM_S, 0, 0, km, (fu,))
    fu0 = unit_of[src_sat]
    if fu0 < 0:
        return _failed((), ())

    frames = [_Frame(fu0, src_sat, None, None)]
    visited = {fu0}
    trace = [fu0]
    nacks = rediscoveries = 0
    while True:
        fr = frames[-1]
        exits = state.members(fr.fu) & dst_visible
        if exits:
            return _finish(frames, exits, snap, caches, src_pos, dst_pos, rediscoveries, nacks, trace)
        if fr.stack is None:
            fr.stack = _acquire_stack(caches, snap, fr.fu, flow.flow_id, dst_pos, policy, fr.prev, mdv_argmin)
        choice = None
        if len(frames) <= ttl:
            for e in fr.stack.entries:
                if e.link in fr.stack.popped:
                    continue
                if not _link_alive(e, fr.fu, state, snap.adj):
                    fr.stack.pop(e.link)
                    continue
                if unit_of[e.v] in visited:
                    continue
                choice = e
                break
        if choice is not None and not fr.protecting:
            if fr.reach is None:
                fr.reach = _unit_reach(state, fr.fu, pos, dst_pos)
            if float(np.linalg.norm(pos[choice.v] - dst_pos)) < fr.reach:
                pass
            elif nacks < n_max:
                fr.protecting = True
                rediscoveries += 1
            else:
                choice = None
        if choice is not None:
            if fr.after_nack:
                rediscoveries += 1
                fr.after_nack = False
            nxt = unit_of[choice.v]
            visited.add(nxt)
            trace.append(nxt)
            frames.append(_Frame(nxt, choice.v, choice, fr.fu))
            continue
        if len(frames) == 1 or nacks >= n_max:
            return _failed([f.fu for f in frames], trace, rediscoveries, nacks)
        nacks += 1
        dead = frames.pop()
        parent = frames[-1]
        parent.stack.pop(dead.via.link)
        parent.protecting = True
        parent.after_nack = True
        trace.append(parent.fu)


# ---------------------------------------------------------------- source selection

@dataclass(frozen=True)
class Selection:
    satellite: int | None
    result: DeliveryResult | None
    probes: int = 0
    failed_probes: int = 0

    @property
    def delivered(self) -> bool:
        return self.result is not None and self.result.delivered


def os3_select_source(queue: SourceQueue, visible: Iterable[int],
                      send: Callable[[int], DeliveryResult],
                      rng: np.random.Generator | None = None, probe_all: bool = True) -> Selection:
    """Pick this step's source satellite for one flow at its source GS.

    Newly visible satellites are probed in random order (when ``rng`` is
    given) and queued with their RTT on success. With ``probe_all`` every new
    satellite is probed first and the data then leaves via the min-RTT entry;
    otherwise the first successful probe carries the data. Queued satellites
    are tried in RTT order and the chosen one is re-measured; a failed
    re-measure ranks it last (RTT = inf).
    """
    visible = frozenset(visible)
    if not visible:
        raise CoverageGapError("no visible satellite")
    new = visible - queue.prev_visible
    gone = queue.prev_visible - visible
    queue.pending |= new
    queue.pending -= gone
    for s in gone:
        queue.rtt.pop(s, None)
    queue.prev_visible = visible

    probes = failed = 0
    last = None
    while queue.pending:
        order = sorted(queue.pending)
        s = order[int(rng.integers(len(order)))] if rng is not None else order[0]
        queue.pending.discard(s)
        res = send(s)
        probes += 1
        last = res
        if res.delivered:
            queue.rtt[s] = 2 * res.latency_s
            if not probe_all:
                return Selection(s, res, probes, failed)
        else:
            failed += 1

    for s, _ in queue.ordered():
        res = send(s)
        last = res
        if res.delivered:
            queue.rtt[s] = 2 * res.latency_s
            return Selection(s, res, probes, failed)
        queue.rtt[s] = math.inf
    return Selection(None, last, probes, failed)
