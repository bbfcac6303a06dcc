"""Small adjacency-list helpers shared by the partitioning and routing code.

Graphs are ``list[tuple[int, ...]]`` indexed by node id, neighbours sorted
ascending. Every helper accepts an optional ``within`` node set restricting
traversal to an induced subgraph.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Sequence

import numpy as np

Adjacency = Sequence[Sequence[int]]


def build_adjacency(n: int, edges: np.ndarray, mask: np.ndarray | None = None) -> list[tuple[int, ...]]:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    if mask is None:
        sel = edges
    else:
        sel = edges[np.asarray(mask, dtype=bool)]
    for u, v in sel.tolist():
        nbrs[u].append(v)
        nbrs[v].append(u)
    return [tuple(sorted(x)) for x in nbrs]


def bfs_distances(adj: Adjacency, src: int, within: set[int] | frozenset[int] | None = None) -> dict[int, int]:
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if v in dist or (within is not None and v not in within):
                continue
            dist[v] = du
            queue.append(v)
    return dist


def components(adj: Adjacency, nodes: Iterable[int]) -> list[set[int]]:
    """Connected components of the subgraph induced by ``nodes``.

    Ordered largest first; equal sizes ordered by smallest member id.
    """
    nodes = set(nodes)
    seen: set[int] = set()
    out = []
    for s in sorted(nodes):
        if s in seen:
            continue
        comp = set(bfs_distances(adj, s, nodes))
        seen |= comp
        out.append(comp)
    out.sort(key=lambda c: (-len(c), min(c)))
    return out


def is_connected(adj: Adjacency, nodes: Iterable[int]) -> bool:
    nodes = set(nodes)
    if not nodes:
        return True
    start = min(nodes)
    return len(bfs_distances(adj, start, nodes)) == len(nodes)


def diameter(adj: Adjacency, nodes: Iterable[int]) -> float:
    """Hop diameter of the induced subgraph; ``inf`` when disconnected."""
    nodes = set(nodes)
    best = 0
    for s in nodes:
        dist = bfs_distances(adj, s, nodes)
        if len(dist) < len(nodes):
            return float("inf")
        best = max(best, max(dist.values()))
    return best


def lexicographic_min_path(adj: Adjacency, src: int, dst: int,
                           within: set[int] | frozenset[int] | None = None) -> list[int] | None:
    """Minimum-hop path with the lexicographically smallest node sequence."""
    dist = bfs_distances(adj, dst, within)
    if src not in dist:
        return None
    path = [src]
    u = src
    while u != dst:
        want = dist[u] - 1
        u = min(v for v in adj[u] if dist.get(v) == want)
        path.append(u)
    return path
