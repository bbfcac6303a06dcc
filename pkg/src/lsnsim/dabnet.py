"""Block partition of the satellite graph: states, connection-quality scoring and evolution.

Forwarding-unit ids: a vagrant satellite is its own unit with id equal to its
satellite id; blocks get ids ``>= n_sats`` so the two never collide. Faulty
satellites map to unit ``-1``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

import numpy as np

from .graph import Adjacency, bfs_distances, build_adjacency, components, diameter, is_connected


class SatelliteStatus(str, enum.Enum):
    VAGRANT = "VAGRANT"
    ASSIGNED = "ASSIGNED"
    FAULT = "FAULT"


class BlockStatus(str, enum.Enum):
    LOWSIZE = "LOWSIZE"
    DISCONN = "DISCONN"
    USTABLE = "USTABLE"
    STABLE = "STABLE"


class Strategy(str, enum.Enum):
    CQSBE = "CQSBE"
    RANDOM = "RANDOM"
    STATIC = "STATIC"


class IsolatedBlockError(ValueError):
    """Raised when a block has no inter-unit links to score."""


@dataclass(frozen=True)
class EvolutionParams:
    d_min: int = 1
    d_max: int = 3
    n_min: int = 2
    epsilon: float = 0.3
    center_prob: float = 0.1
    seed: int = 0
    max_evolution_iters: int = 32
    div_floor: float = 1e-3

    def __post_init__(self):
        if not 1 <= self.d_min <= self.d_max:
            raise ValueError(f"need 1 <= d_min <= d_max, got {self.d_min}, {self.d_max}")
        if self.n_min < 2:
            raise ValueError(f"n_min must be >= 2, got {self.n_min}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if not 0 < self.center_prob <= 1:
            raise ValueError(f"center_prob must lie in (0, 1], got {self.center_prob}")
        if self.max_evolution_iters < 1:
            raise ValueError("max_evolution_iters must be positive")


@dataclass(frozen=True)
class Block:
    id: int
    members: frozenset[int]
    controller: int
    status: BlockStatus = BlockStatus.USTABLE

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"block {self.id} is empty")
        if self.controller not in self.members:
            raise ValueError(f"block {self.id}: controller {self.controller} is not a member")


@dataclass(frozen=True, eq=False)
class DabnetState:
    n_sats: int
    blocks: Mapping[int, Block]
    vagrants: frozenset[int]
    faults: frozenset[int]
    iul_edges: frozenset[tuple[int, int]]
    unit_of: tuple[int, ...]
    next_block_id: int
    round: int = 0
    t: float = 0.0
    stats: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def initial(cls, n_sats: int, adj: Adjacency | None = None) -> "DabnetState":
        """Every satellite vagrant (or faulty when it has no available ISL)."""
        faults = frozenset(s for s in range(n_sats) if adj is not None and not adj[s])
        vagrants = frozenset(range(n_sats)) - faults
        unit_of = tuple(-1 if s in faults else s for s in range(n_sats))
        iul = _iul_edges(unit_of, adj) if adj is not None else frozenset()
        return cls(n_sats, {}, vagrants, faults, iul, unit_of, n_sats)

    @classmethod
    def from_blocks(cls, n_sats: int, groups: Iterable[Iterable[int]], adj: Adjacency,
                    faults: Iterable[int] = ()) -> "DabnetState":
        """Hand-built partition; controllers are the lowest member id."""
        faults = frozenset(faults)
        blocks = {}
        bid = n_sats
        for g in groups:
            g = frozenset(g)
            blocks[bid] = Block(bid, g, min(g), BlockStatus.STABLE)
            bid += 1
        assigned = frozenset().union(*(b.members for b in blocks.values()))
        vagrants = frozenset(range(n_sats)) - assigned - faults
        unit_of = _unit_table(n_sats, blocks, faults)
        return cls(n_sats, blocks, vagrants, faults, _iul_edges(unit_of, adj), unit_of, bid)

    def units(self) -> list[int]:
        return sorted(self.vagrants) + sorted(self.blocks)

    def members(self, fu: int) -> frozenset[int]:
        if fu >= self.n_sats:
            return self.blocks[fu].members
        if fu in self.vagrants:
            return frozenset((fu,))
        raise KeyError(f"unknown forwarding unit {fu}")

    def is_block(self, fu: int) -> bool:
        return fu >= self.n_sats

    def status_of(self, sat: int) -> SatelliteStatus:
        if sat in self.faults:
            return SatelliteStatus.FAULT
        if sat in self.vagrants:
            return SatelliteStatus.VAGRANT
        return SatelliteStatus.ASSIGNED

    def mean_fu_degree(self) -> float:
        n_units = len(self.blocks) + len(self.vagrants)
        return 2 * len(self.iul_edges) / n_units if n_units else 0.0


def _unit_table(n_sats: int, blocks: Mapping[int, Block], faults: frozenset[int]) -> tuple[int, ...]:
    unit = list(range(n_sats))
    for s in faults:
        unit[s] = -1
    for bid, b in blocks.items():
        for s in b.members:
            unit[s] = bid
    return tuple(unit)


def _iul_edges(unit_of: tuple[int, ...], adj: Adjacency) -> frozenset[tuple[int, int]]:
    out = set()
    for u, nbrs in enumerate(adj):
        uu = unit_of[u]
        for v in nbrs:
            if u < v and uu != unit_of[v] and uu >= 0 and unit_of[v] >= 0:
                out.add((u, v))
    return frozenset(out)


def _members(block) -> frozenset[int]:
    return block.members if isinstance(block, Block) else frozenset(block)


def inter_unit_links(block, adj: Adjacency) -> list[tuple[int, int]]:
    """Available ISLs leaving ``block``, oriented block-side first."""
    members = _members(block)
    return [(u, v) for u in sorted(members) for v in adj[u] if v not in members]


def directional_connectivity(block, adj: Adjacency, positions: np.ndarray) -> float:
    """Norm of the summed IUL unit vectors divided by the IUL count, in [0, 1]."""
    links = inter_unit_links(block, adj)
    if not links:
        raise IsolatedBlockError("block has no inter-unit links")
    u = np.fromiter((a for a, _ in links), dtype=np.int64, count=len(links))
    v = np.fromiter((b for _, b in links), dtype=np.int64, count=len(links))
    d = positions[v] - positions[u]
    unit = d / np.linalg.norm(d, axis=1)[:, None]
    return float(np.linalg.norm(unit.sum(axis=0)) / len(links))


def volume(nodes: Iterable[int], adj: Adjacency) -> int:
    return sum(len(adj[s]) for s in nodes)


def cqs_score(block, adj: Adjacency, positions: np.ndarray, div_floor: float = 1e-3,
              total_volume: int | None = None) -> float:
    """Connection quality: ``min(vol(B), vol(rest)) / max(div, div_floor)``; 0 when isolated."""
    members = _members(block)
    try:
        div = directional_connectivity(members, adj, positions)
    except IsolatedBlockError:
        return 0.0
    if total_volume is None:
        total_volume = volume(range(len(adj)), adj)
    vol_in = volume(members, adj)
    return min(vol_in, total_volume - vol_in) / max(div, div_floor)


def closeness_centrality(u: int, block, adj: Adjacency) -> float:
    members = _members(block)
    if u not in members:
        raise ValueError(f"satellite {u} is not in the block")
    if len(members) < 2:
        raise ValueError("closeness is undefined for a singleton block")
    dist = bfs_distances(adj, u, members)
    if len(dist) < len(members):
        raise ValueError("block subgraph is disconnected")
    return (len(members) - 1) / sum(dist.values())


def adjacent_vagrants(block, adj: Adjacency, vagrants) -> list[int]:
    members = _members(block)
    return sorted({v for u in members for v in adj[u] if v in vagrants and v not in members})


def classify_block(block: Block, adj: Adjacency, vagrants, params: EvolutionParams) -> BlockStatus:
    members = block.members
    if not is_connected(adj, members):
        return BlockStatus.DISCONN
    diam = diameter(adj, members)
    can_absorb = bool(adjacent_vagrants(members, adj, vagrants))
    if (len(members) < params.n_min or diam < params.d_min) and not can_absorb:
        return BlockStatus.LOWSIZE
    if diam > params.d_max:
        return BlockStatus.USTABLE
    if diam == params.d_max or not can_absorb:
        return BlockStatus.STABLE
    return BlockStatus.USTABLE


def expansion_candidates(block: Block, adj: Adjacency, positions: np.ndarray, vagrants,
                         params: EvolutionParams, total_volume: int | None = None) -> list[tuple[int, float]]:
    """Each adjacent vagrant with the score of the block after absorbing it."""
    if total_volume is None:
        total_volume = volume(range(len(adj)), adj)
    return [(s, cqs_score(block.members | {s}, adj, positions, params.div_floor, total_volume))
            for s in adjacent_vagrants(block, adj, vagrants)]


def shrink_victim(block: Block, adj: Adjacency) -> int:
    """Member with the lowest closeness; the controller is spared unless it alone is lowest."""
    members = block.members
    phi = {s: closeness_centrality(s, members, adj) for s in members}
    low = min(phi.values())
    lowest = [s for s in members if phi[s] == low]
    if lowest == [block.controller] and len(members) > 2:
        return block.controller
    eligible = members - {block.controller}
    return min(eligible, key=lambda s: (phi[s], s))


def cqsbe_evolve(block: Block, adj: Adjacency, positions: np.ndarray, vagrants, params: EvolutionParams,
                 strategy: Strategy = Strategy.CQSBE, rng: np.random.Generator | None = None,
                 total_volume: int | None = None) -> Block:
    """One expansion or shrink step; returns the new block (status not re-classified).

    The RANDOM strategy picks uniformly from the same candidate sets.
    """
    strategy = Strategy(strategy)
    if strategy is Strategy.RANDOM and rng is None:
        raise ValueError("RANDOM evolution needs an rng")
    members = block.members
    if diameter(adj, members) < params.d_max:
        cands = adjacent_vagrants(block, adj, vagrants)
        if not cands:
            return replace(block, status=BlockStatus.STABLE)
        if strategy is Strategy.RANDOM:
            pick = cands[int(rng.integers(len(cands)))]
        else:
            scored = expansion_candidates(block, adj, positions, vagrants, params, total_volume)
            pick = max(scored, key=lambda c: (c[1], -c[0]))[0]
        return replace(block, members=members | {pick}, status=BlockStatus.USTABLE)

    if strategy is Strategy.RANDOM:
        eligible = sorted(members - {block.controller})
        victim = eligible[int(rng.integers(len(eligible)))]
    else:
        victim = shrink_victim(block, adj)
    rest = members - {victim}
    controller = block.controller if victim != block.controller else min(rest)
    return Block(block.id, rest, controller, BlockStatus.USTABLE)


def _split_keep_largest(block: Block, adj: Adjacency) -> tuple[Block, frozenset[int]]:
    comps = components(adj, block.members)
    keep = frozenset(comps[0])
    ctrl = block.controller if block.controller in keep else min(keep)
    return Block(block.id, keep, ctrl, BlockStatus.DISCONN), block.members - keep


def evolve_round(state: DabnetState, adj: Adjacency, positions: np.ndarray, params: EvolutionParams,
                 strategy: Strategy = Strategy.CQSBE, t: float | None = None) -> DabnetState:
    """One maintenance round over an availability-masked adjacency.

    Order: fault marking, center promotion (not for STATIC), then each block in
    ascending id runs its classify/evolve loop. Vagrants claimed by an earlier
    block are no longer visible to later ones.
    """
    strategy = Strategy(strategy)
    n = state.n_sats
    rng = np.random.default_rng([params.seed, state.round])
    faults = frozenset(s for s in range(n) if not adj[s])
    vagrants = (set(state.vagrants) | (set(state.faults) - faults)) - faults

    blocks: dict[int, Block] = {}
    for bid in sorted(state.blocks):
        b = state.blocks[bid]
        keep = b.members - faults
        if keep:
            ctrl = b.controller if b.controller in keep else min(keep)
            blocks[bid] = Block(bid, keep, ctrl, b.status)

    next_id = state.next_block_id
    promoted = 0
    if strategy is not Strategy.STATIC:
        for s in sorted(vagrants):
            if rng.random() < params.center_prob:
                blocks[next_id] = Block(next_id, frozenset((s,)), s, BlockStatus.USTABLE)
                vagrants.discard(s)
                next_id += 1
                promoted += 1

    total_vol = volume(range(n), adj)
    evolutions = 0
    final: dict[int, Block] = {}
    for bid in sorted(blocks):
        b = blocks[bid]
        alive = True
        for _ in range(params.max_evolution_iters):
            status = classify_block(b, adj, vagrants, params)
            if status is BlockStatus.DISCONN:
                b, released = _split_keep_largest(b, adj)
                vagrants |= released
                continue
            if status is BlockStatus.LOWSIZE:
                vagrants |= b.members
                alive = False
                break
            if status is BlockStatus.STABLE:
                b = replace(b, status=BlockStatus.STABLE)
                break
            if strategy is Strategy.STATIC:
                b = replace(b, status=BlockStatus.USTABLE)
                break
            nb = cqsbe_evolve(b, adj, positions, vagrants, params, strategy, rng, total_vol)
            evolutions += 1
            vagrants -= nb.members - b.members
            vagrants |= b.members - nb.members
            b = nb
            if b.status is BlockStatus.STABLE:
                break
        else:
            if not is_connected(adj, b.members):
                b, released = _split_keep_largest(b, adj)
                vagrants |= released
            b = replace(b, status=BlockStatus.USTABLE)
        if alive:
            final[bid] = b

    unit_of = _unit_table(n, final, faults)
    stats = {"promoted": promoted, "evolution_steps": evolutions}
    return DabnetState(
        n_sats=n,
        blocks=final,
        vagrants=frozenset(vagrants),
        faults=faults,
        iul_edges=_iul_edges(unit_of, adj),
        unit_of=unit_of,
        next_block_id=next_id,
        round=state.round + 1,
        t=state.t if t is None else t,
        stats=stats,
    )


def maintain_dabnet(state: DabnetState, topology, schedule, t: float, params: EvolutionParams,
                    strategy: Strategy = Strategy.CQSBE) -> DabnetState:
    from .constellation import positions_at

    adj = build_adjacency(topology.n_sats, topology.edges, schedule.mask(t))
    return evolve_round(state, adj, positions_at(topology, t), params, strategy, t)


def balance_bound(state: DabnetState, epsilon: float) -> float:
    """Right-hand side of the size-balance constraint; ``inf`` without blocks."""
    if not state.blocks:
        return float("inf")
    total = sum(len(b.members) for b in state.blocks.values())
    return (1 + epsilon) / len(state.blocks) * total


def partition_violations(state: DabnetState, adj: Adjacency | None = None) -> list[str]:
    """Empty when blocks, vagrants and faults partition the satellites consistently."""
    out = []
    seen: dict[int, str] = {}
    for bid, b in state.blocks.items():
        if bid < state.n_sats:
            out.append(f"block id {bid} collides with satellite ids")
        for s in b.members:
            if s in seen:
                out.append(f"satellite {s} in {seen[s]} and block {bid}")
            seen[s] = f"block {bid}"
    for s in state.vagrants:
        if s in seen:
            out.append(f"satellite {s} in {seen[s]} and vagrants")
        seen[s] = "vagrants"
    for s in state.faults:
        if s in seen:
            out.append(f"satellite {s} in {seen[s]} and faults")
        seen[s] = "faults"
    missing = set(range(state.n_sats)) - set(seen)
    if missing:
        out.append(f"unassigned satellites {sorted(missing)[:10]}")
    if adj is not None:
        for s in state.faults:
            if adj[s]:
                out.append(f"fault {s} still has available links")
        for bid, b in state.blocks.items():
            if not is_connected(adj, b.members):
                out.append(f"block {bid} disconnected")
        if state.iul_edges != _iul_edges(state.unit_of, adj):
            out.append("stale inter-unit link set")
    return out
