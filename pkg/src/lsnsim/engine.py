"""Time-driven scenario runner.

Each step: propagate, mask failed ISLs, run one DABNet maintenance round,
record overhead events, refresh protection stacks, then make one delivery
attempt per active flow and router. Everything is a pure function of the
scenario config.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .baselines import (
    Metric,
    OverheadEvent,
    OverheadModel,
    convergence_overhead,
    greedy_geo_baseline,
    path_to_ground,
)
from .config import ScenarioConfig, validate
from .constellation import (
    C_KM_S,
    OMEGA_EARTH,
    R_EARTH_KM,
    GroundStation,
    ShellConfig,
    build_constellation,
    great_circle_km,
    positions_at,
)
from .dabnet import DabnetState, EvolutionParams, Strategy, evolve_round
from .failure import FailureConfig, schedule_failures
from .graph import bfs_distances, build_adjacency
from .naming import GnsDirectory, gns_resolve
from .routing import (
    Dataflow,
    DeliveryResult,
    GeoPolicy,
    RoutingCaches,
    Snapshot,
    deliver_with_nbas,
    os3_select_source,
    refresh_caches,
)

FIBER_STRETCH = 1.5


@dataclass(frozen=True)
class CityRecord:
    name: str
    lat_deg: float
    lon_deg: float
    gdp_weight: float
    population_weight: float

    def __post_init__(self):
        if self.gdp_weight < 0 or self.population_weight < 0:
            raise ValueError(f"{self.name}: weights must be non-negative")
        if self.gdp_weight == 0 and self.population_weight == 0:
            raise ValueError(f"{self.name}: at least one weight must be positive")


def load_cities(path=None) -> list[CityRecord]:
    """Read the city table (``#`` lines are comments). ``None`` loads the bundled one."""
    if path is None:
        text = resources.files("lsnsim").joinpath("data/cities.csv").read_text()
    else:
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"city file not found: {path}")
        text = path.read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(CityRecord(row["name"].strip(), float(row["lat_deg"]), float(row["lon_deg"]),
                              float(row["gdp_weight"]), float(row["population_weight"])))
    names = [c.name for c in out]
    if len(set(names)) != len(names):
        raise ValueError("duplicate city names in city table")
    return out


def city_weights(cities: list[CityRecord], gdp_share: float = 0.5) -> np.ndarray:
    gdp = np.array([c.gdp_weight for c in cities], dtype=float)
    pop = np.array([c.population_weight for c in cities], dtype=float)
    g = gdp / gdp.sum() if gdp.sum() > 0 else np.zeros_like(gdp)
    p = pop / pop.sum() if pop.sum() > 0 else np.zeros_like(pop)
    return gdp_share * g + (1 - gdp_share) * p


def pair_distribution(cities: list[CityRecord], gdp_share: float = 0.5) -> np.ndarray:
    """Ordered-pair probabilities ``P[i, j] ∝ w_i w_j``; zero on the diagonal and co-located pairs."""
    w = city_weights(cities, gdp_share)
    P = np.outer(w, w)
    for i, a in enumerate(cities):
        for j, b in enumerate(cities):
            if i == j or (a.lat_deg == b.lat_deg and a.lon_deg == b.lon_deg):
                P[i, j] = 0.0
    total = P.sum()
    if total <= 0:
        raise ValueError("no city pair has positive traffic weight")
    return P / total


def generate_traffic(cities: list[CityRecord], flow_count: int, duration_s: float, seed: int,
                     min_duration_s: float = 60.0, max_duration_s: float = 600.0,
                     gdp_share: float = 0.5) -> list[Dataflow]:
    if len(cities) < 2:
        raise ValueError("traffic generation needs at least two cities")
    P = pair_distribution(cities, gdp_share)
    n = len(cities)
    rng = np.random.default_rng(seed)
    picks = rng.choice(n * n, size=flow_count, p=P.ravel())
    starts = rng.uniform(0.0, duration_s, size=flow_count)
    lengths = rng.uniform(min_duration_s, max_duration_s, size=flow_count)
    flows = []
    for k in range(flow_count):
        i, j = divmod(int(picks[k]), n)
        src, dst = cities[i].name, cities[j].name
        flows.append(Dataflow(k, src, dst, float(starts[k]), float(starts[k] + lengths[k]),
                              src_identifier=f"id:{src}", dst_identifier=f"id:{dst}"))
    return flows


def compute_stretch(path_km: float, src: GroundStation, dst: GroundStation) -> float:
    gc = great_circle_km(src.lat_deg, src.lon_deg, dst.lat_deg, dst.lon_deg)
    if gc <= 0:
        raise ValueError(f"co-located endpoints {src.id} and {dst.id}")
    return path_km / gc


def compute_jitter(series: dict[int, list[float]] | list[list[float]]) -> float | None:
    """Mean over flows of the population std of delivered latencies; ``None`` if no flow qualifies."""
    values = series.values() if isinstance(series, dict) else series
    stds = [statistics.pstdev(s) for s in values if len(s) >= 2]
    return float(np.mean(stds)) if stds else None


def flow_jitters(series: dict[int, list[float]]) -> dict[int, float]:
    return {fid: statistics.pstdev(s) for fid, s in sorted(series.items()) if len(s) >= 2}


# ---------------------------------------------------------------- helpers

def _stations_eci(lat: np.ndarray, lon: np.ndarray, t: float) -> np.ndarray:
    la = np.radians(lat)
    th = np.radians(lon) + OMEGA_EARTH * t
    return R_EARTH_KM * np.stack([np.cos(la) * np.cos(th), np.cos(la) * np.sin(th), np.sin(la)], axis=1)


def _visibility(ground: np.ndarray, sats: np.ndarray, min_el: float) -> list[frozenset[int]]:
    up = ground / np.linalg.norm(ground, axis=1, keepdims=True)
    d = sats[None, :, :] - ground[:, None, :]
    rng = np.linalg.norm(d, axis=2)
    sin_el = np.einsum("gsk,gk->gs", d, up) / rng
    ok = sin_el >= math.sin(math.radians(min_el))
    return [frozenset(np.flatnonzero(row).tolist()) for row in ok]


def _chain_km(src_pos, sats, dst_pos, positions) -> float:
    p = positions[list(sats)]
    km = float(np.linalg.norm(p[0] - src_pos) + np.linalg.norm(p[-1] - dst_pos))
    if len(sats) > 1:
        km += float(np.linalg.norm(np.diff(p, axis=0), axis=1).sum())
    return km


def _nearest(visible: frozenset[int], gpos: np.ndarray, positions: np.ndarray) -> int:
    vs = sorted(visible)
    d = np.linalg.norm(positions[vs] - gpos, axis=1)
    return vs[int(np.argmin(d))]


def _block_signatures(state: DabnetState, adj) -> dict[int, tuple]:
    out = {}
    for bid, b in state.blocks.items():
        m = b.members
        edges = tuple(sorted((u, v) for u in m for v in adj[u] if v in m and u < v))
        out[bid] = (m, edges)
    return out


def resolve_strategy(name: str) -> tuple[Strategy, bool]:
    """Config strategy name to (maintenance strategy, run bootstrap rounds)."""
    name = name.upper()
    if name == "BASIC":
        return Strategy.STATIC, False
    return Strategy(name), True


@dataclass
class _RouterStats:
    attempts: int = 0
    delivered: int = 0
    failed: int = 0
    coverage_gap: int = 0
    stretch: list = field(default_factory=list)
    latency: dict = field(default_factory=lambda: defaultdict(list))
    rediscoveries: Counter = field(default_factory=Counter)
    nacks: int = 0
    probes: int = 0
    failed_probes: int = 0
    flows_seen: set = field(default_factory=set)
    flows_delivered: set = field(default_factory=set)


@dataclass
class MetricsReport:
    """``summary`` holds stable, JSON-ready aggregates; the rest are per-record artifacts."""

    summary: dict
    traces: list[dict]
    audit: list[OverheadEvent]
    tables: dict[str, list[dict]]

    def to_json(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2, allow_nan=False)


def _pct(num: int, den: int) -> float | None:
    return 100.0 * num / den if den else None


def _mean(xs) -> float | None:
    return float(np.mean(xs)) if len(xs) else None


# ---------------------------------------------------------------- main loop

def run_scenario(cfg: ScenarioConfig, keep_traces: bool = True) -> MetricsReport:
    validate(cfg)
    c = cfg.constellation
    topo = build_constellation(ShellConfig(c.planes, c.sats_per_plane, c.altitude_km, c.inclination_deg,
                                           c.phase_offset))
    n = topo.n_sats
    f = cfg.failure
    schedule = schedule_failures(topo, FailureConfig(f.ratio, f.period_s, cfg.derive_seed("failure"),
                                                     (f.down_min, f.down_max)))

    cities = load_cities(cfg.ground.cities)
    flows = generate_traffic(cities, cfg.traffic.flows, cfg.duration_s, cfg.derive_seed("traffic"),
                             cfg.traffic.min_duration_s, cfg.traffic.max_duration_s, cfg.traffic.gdp_share)
    used = sorted({fl.src_gs for fl in flows} | {fl.dst_gs for fl in flows})
    by_name = {ct.name: ct for ct in cities}
    stations = {nm: GroundStation(nm, by_name[nm].lat_deg, by_name[nm].lon_deg, 0.0, cfg.ground.min_elevation_deg)
                for nm in used}
    gidx = {nm: k for k, nm in enumerate(used)}
    lat = np.array([stations[nm].lat_deg for nm in used], dtype=float)
    lon = np.array([stations[nm].lon_deg for nm in used], dtype=float)
    gns = GnsDirectory.from_stations(GroundStation(f"id:{nm}", st.lat_deg, st.lon_deg, st.alt_km)
                                     for nm, st in stations.items())

    d = cfg.dabnet
    strategy, bootstrap = resolve_strategy(d.strategy)
    params = EvolutionParams(d.d_min, d.d_max, d.n_min, d.epsilon, d.center_prob, cfg.derive_seed("dabnet"),
                             d.max_evolution_iters, d.div_floor)
    r = cfg.routing
    policy = GeoPolicy(r.policy.upper())
    routers = list(dict.fromkeys(r.routers))
    dabr_routers = [x for x in routers if x.startswith("dabr")]
    caches = {x: RoutingCaches(delta=float(r.delta_s)) for x in dabr_routers}
    os3_rng = {x: np.random.default_rng(cfg.derive_seed(f"os3:{x}")) for x in dabr_routers}
    n_max = {"dabr": r.n_max, "dabr_nonbas": 0}
    stats = {x: _RouterStats() for x in routers}
    models = [OverheadModel(m, cfg.overhead.aodv_load_fraction if m == "AODV_LIKE" else 1.0)
              for m in cfg.overhead.models]

    steps = int(math.floor(cfg.duration_s / cfg.timestep_s + 1e-9))
    times = [k * cfg.timestep_s for k in range(steps)]

    # bootstrap the partition on the t=0 snapshot
    pos0 = positions_at(topo, 0.0)
    adj0 = build_adjacency(n, topo.edges, schedule.mask(0.0))
    state = DabnetState.initial(n, adj0)
    if bootstrap and strategy is not Strategy.STATIC:
        for _ in range(d.init_rounds):
            state = evolve_round(state, adj0, pos0, params, strategy, 0.0)
    elif bootstrap:
        for _ in range(d.init_rounds):
            state = evolve_round(state, adj0, pos0, params, Strategy.CQSBE, 0.0)

    audit: list[OverheadEvent] = []
    traces: list[dict] = []
    iul_changes: list[int] = []
    block_counts: list[int] = []
    vagrant_counts: list[int] = []
    fu_degrees: list[float] = []
    evolution_events = 0
    prev_mask = None
    prev_vis: list[frozenset[int]] | None = None
    prev_sigs = _block_signatures(state, adj0)
    prev_iul = state.iul_edges
    resolved: dict[int, tuple] = {}
    aodv_path: dict[int, tuple[int, ...] | None] = {}
    pfs_rows = []

    for t in times:
        positions = positions_at(topo, t)
        mask = schedule.mask(t)
        adj = build_adjacency(n, topo.edges, mask)
        state = evolve_round(state, adj, positions, params, strategy, t)
        n_avail = int(mask.sum())

        # dabnet survivability
        iul_changes.append(len(state.iul_edges ^ prev_iul))
        prev_iul = state.iul_edges
        block_counts.append(len(state.blocks))
        vagrant_counts.append(len(state.vagrants))
        fu_degrees.append(state.mean_fu_degree())

        gpos = _stations_eci(lat, lon, t)
        vis = _visibility(gpos, positions, cfg.ground.min_elevation_deg) if used else []

        # overhead events relative to the previous step
        if prev_mask is not None:
            for _ in range(int(np.count_nonzero(mask != prev_mask))):
                audit.append(OverheadEvent(t, "isl_flip", n, n_avail))
            for k in range(len(used)):
                if vis[k] != prev_vis[k]:
                    audit.append(OverheadEvent(t, "gsl_change", n, n_avail))
        sigs = _block_signatures(state, adj)
        if prev_mask is not None:
            for bid in sorted(sigs):
                if prev_sigs.get(bid) != sigs[bid]:
                    audit.append(OverheadEvent(t, "block_evolution", len(sigs[bid][0]), len(sigs[bid][1])))
                    evolution_events += 1
        prev_sigs = sigs
        prev_mask = mask
        prev_vis = vis

        active = [fl for fl in flows if fl.active(t)]
        for fl in flows:
            if fl.flow_id in resolved and not fl.active(t) and t >= fl.end_t:
                for cx in caches.values():
                    cx.drop_flow(fl.flow_id)
        dst_pos = {}
        for fl in active:
            if fl.flow_id not in resolved:
                loc, lease = gns_resolve(gns, fl.src_identifier, fl.dst_identifier, t)
                resolved[fl.flow_id] = (loc, lease)
            dst_pos[fl.flow_id] = gpos[gidx[fl.dst_gs]]

        # AODV-like accounting follows a hop-shortest path per flow
        comp_cache: dict[int, int] = {}
        for fl in active:
            sv, dv = vis[gidx[fl.src_gs]], vis[gidx[fl.dst_gs]]
            old = aodv_path.get(fl.flow_id, "new")
            if old not in ("new", None) and _path_valid(old, adj, sv, dv):
                continue
            path = None
            src = None
            if sv and dv:
                src = _nearest(sv, gpos[gidx[fl.src_gs]], positions)
                path = path_to_ground(adj, src, dv, Metric.HOPS, positions, gpos[gidx[fl.dst_gs]])
            if old == "new" or old is not None:
                scope = 0
                if src is not None:
                    if src not in comp_cache:
                        comp = bfs_distances(adj, src)
                        for s in comp:
                            comp_cache[s] = len(comp)
                    scope = comp_cache[src]
                kind = "flow_arrival" if old == "new" else "path_break"
                audit.append(OverheadEvent(t, kind, scope, 0, len(path) if path else 0))
            aodv_path[fl.flow_id] = tuple(path) if path else None

        snap = Snapshot(t, state, adj, positions)
        for x in dabr_routers:
            refresh_caches(caches[x], snap, dst_pos, policy, r.mdv_argmin)

        sdp_tree = None
        if "sdp" in routers and active:
            sdp_tree = _sdp_trees(active, vis, gidx, gpos, positions, topo.edges, mask, n)

        for fl in active:
            si, di = gidx[fl.src_gs], gidx[fl.dst_gs]
            sv, dv = vis[si], vis[di]
            spos, dpos = gpos[si], gpos[di]
            for x in routers:
                st = stats[x]
                st.attempts += 1
                st.flows_seen.add(fl.flow_id)
                if not sv or not dv:
                    st.coverage_gap += 1
                    if keep_traces:
                        traces.append(_trace(x, fl, t, "COVERAGE_GAP", None, None, ()))
                    continue
                src_sat = None
                km = None
                extra = {}
                if x in caches:
                    cx = caches[x]

                    def send(s, _fl=fl, _cx=cx, _nm=n_max[x], _sv=sv, _dv=dv, _sp=spos, _dp=dpos):
                        return deliver_with_nbas(_fl, s, snap, policy, _cx, _nm, src_pos=_sp, dst_pos=_dp,
                                                 dst_visible=_dv, src_visible=_sv, ttl=r.ttl,
                                                 mdv_argmin=r.mdv_argmin)

                    sel = os3_select_source(cx.queue(fl.src_gs, fl.flow_id), sv, send, os3_rng[x],
                                            r.os3_probe_all)
                    st.probes += sel.probes
                    st.failed_probes += sel.failed_probes
                    res: DeliveryResult | None = sel.result
                    if sel.delivered:
                        src_sat = sel.satellite
                        km = res.path_km
                        sats = res.sat_path
                        st.rediscoveries[res.rediscoveries] += 1
                        st.nacks += res.nacks
                        extra = {"fu_path": list(res.fu_path), "nacks": res.nacks,
                                 "rediscoveries": res.rediscoveries}
                    elif res is not None:
                        st.nacks += res.nacks
                        extra = {"fu_path": list(res.fu_trace), "nacks": res.nacks,
                                 "rediscoveries": res.rediscoveries}
                elif x == "greedy":
                    s0 = _nearest(sv, spos, positions)
                    g = greedy_geo_baseline(s0, dpos, adj, positions, policy, dv, r.ttl, r.mdv_argmin)
                    if g.delivered:
                        src_sat, sats = s0, g.path
                        km = _chain_km(spos, sats, dpos, positions)
                elif x == "mhp":
                    s0 = _nearest(sv, spos, positions)
                    p = path_to_ground(adj, s0, dv, Metric.HOPS, positions, dpos)
                    if p:
                        src_sat, sats = s0, tuple(p)
                        km = _chain_km(spos, sats, dpos, positions)
                elif x == "sdp":
                    s0 = _nearest(sv, spos, positions)
                    p = _sdp_path(sdp_tree, s0, dv, dpos, positions)
                    if p:
                        src_sat, sats = s0, tuple(p)
                        km = _chain_km(spos, sats, dpos, positions)
                if km is None:
                    st.failed += 1
                    if keep_traces:
                        traces.append(_trace(x, fl, t, "FAILED", None, None, (), extra))
                    continue
                st.delivered += 1
                st.flows_delivered.add(fl.flow_id)
                lat_s = km / C_KM_S
                st.latency[fl.flow_id].append(lat_s)
                stretch = compute_stretch(km, stations[fl.src_gs], stations[fl.dst_gs])
                st.stretch.append(stretch)
                if keep_traces:
                    traces.append(_trace(x, fl, t, "DELIVERED", src_sat, lat_s, sats, {**extra, "stretch": stretch}))

        row = {"t": t}
        for x in dabr_routers:
            cnt = caches[x].counters.get(t, Counter())
            row[f"{x}_init"] = cnt["init"]
            row[f"{x}_refresh"] = cnt["refresh"]
            row[f"{x}_lookup"] = cnt["lookup"]
        pfs_rows.append(row)

    return _assemble(cfg, routers, dabr_routers, stats, models, audit, traces, pfs_rows, caches, flows, schedule,
                     iul_changes, block_counts, vagrant_counts, fu_degrees, state, evolution_events, resolved)


def _path_valid(path, adj, sv, dv) -> bool:
    if path[0] not in sv or path[-1] not in dv:
        return False
    return all(b in adj[a] for a, b in zip(path, path[1:]))


def _sdp_trees(active, vis, gidx, gpos, positions, edges, mask, n):
    sel = edges[mask]
    w = np.linalg.norm(positions[sel[:, 0]] - positions[sel[:, 1]], axis=1)
    g = csr_matrix((w, (sel[:, 0], sel[:, 1])), shape=(n, n))
    srcs = sorted({_nearest(vis[gidx[fl.src_gs]], gpos[gidx[fl.src_gs]], positions)
                   for fl in active if vis[gidx[fl.src_gs]]})
    if not srcs:
        return {}
    dist, pred = dijkstra(g, directed=False, indices=srcs, return_predecessors=True)
    return {s: (dist[k], pred[k]) for k, s in enumerate(srcs)}


def _sdp_path(trees, src, dv, dpos, positions) -> list[int] | None:
    dist, pred = trees[src]
    best = None
    for x in sorted(dv):
        if not np.isfinite(dist[x]):
            continue
        cost = dist[x] + float(np.linalg.norm(positions[x] - dpos))
        if best is None or cost < best[0]:
            best = (cost, x)
    if best is None:
        return None
    path = [best[1]]
    while path[-1] != src:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def _trace(router, fl, t, outcome, src_sat, latency, sats, extra=None) -> dict:
    rec = {"router": router, "flow_id": fl.flow_id, "t": t, "outcome": outcome,
           "src_gs": fl.src_gs, "dst_gs": fl.dst_gs, "src_sat": src_sat,
           "latency_s": latency, "sat_path": [int(s) for s in sats]}
    if extra:
        rec.update(extra)
    return rec


def _assemble(cfg, routers, dabr_routers, stats, models, audit, traces, pfs_rows, caches, flows, schedule,
              iul_changes, block_counts, vagrant_counts, fu_degrees, state, evolution_events, resolved):
    router_summary = {}
    latency_rows = []
    jitter_rows = []
    for x in routers:
        st = stats[x]
        routable = st.attempts - st.coverage_gap
        stretches = st.stretch
        jit = flow_jitters(st.latency)
        router_summary[x] = {
            "attempts": st.attempts,
            "delivered": st.delivered,
            "failed": st.failed,
            "coverage_gap": st.coverage_gap,
            "reachability_pct": _pct(st.delivered, st.attempts),
            "reachability_routable_pct": _pct(st.delivered, routable),
            "flow_reachability_pct": _pct(len(st.flows_delivered), len(st.flows_seen)),
            "mean_stretch": _mean(stretches),
            "min_stretch": float(min(stretches)) if stretches else None,
            "stretch_below_fiber_pct": _pct(sum(s < FIBER_STRETCH for s in stretches), len(stretches)),
            "mean_latency_s": _mean([v for s in st.latency.values() for v in s]),
            "jitter_s": compute_jitter(st.latency),
            "jitter_flows": len(jit),
            "rediscovery_histogram": {str(k): v for k, v in sorted(st.rediscoveries.items())},
            "nacks": st.nacks,
            "os3_probes": st.probes,
            "os3_failed_probes": st.failed_probes,
        }
        for fid, series in sorted(st.latency.items()):
            for lat_s in series:
                latency_rows.append({"router": x, "flow_id": fid, "latency_s": lat_s})
        for fid, j in jit.items():
            jitter_rows.append({"router": x, "flow_id": fid, "jitter_s": j})

    overhead = {}
    for m in models:
        oc = convergence_overhead(m, audit)
        overhead[m.protocol.value] = {"fib_updates": oc.fib_updates, "control_messages": oc.control_messages,
                                      "load_fraction": m.load_fraction}

    pfs_totals = {}
    waves = {}
    for x in dabr_routers:
        pfs_totals[x] = {k: int(sum(row[f"{x}_{k}"] for row in pfs_rows)) for k in ("init", "refresh", "lookup")}
        pfs_totals[x]["fib_rebuilds"] = caches[x].fib_rebuilds
        waves[x] = [row["t"] for row in pfs_rows if row[f"{x}_refresh"] > 0]

    ev_counts = Counter(e.kind for e in audit)
    summary = {
        "scenario": cfg.name,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "steps": len(pfs_rows),
        "flows": len(flows),
        "flows_started": len(resolved),
        "reachability_defined": any(stats[x].attempts for x in routers),
        "routers": router_summary,
        "overhead": overhead,
        "overhead_events": dict(sorted(ev_counts.items())),
        "dabnet": {
            "strategy": cfg.dabnet.strategy.upper(),
            "iul_changes_per_round": _mean(iul_changes[1:]) if len(iul_changes) > 1 else 0.0,
            "end_vagrants": len(state.vagrants),
            "end_blocks": len(state.blocks),
            "end_faults": len(state.faults),
            "mean_vagrants": _mean(vagrant_counts),
            "mean_blocks": _mean(block_counts),
            "mean_fu_degree": _mean(fu_degrees),
            "end_mean_fu_degree": state.mean_fu_degree(),
            "block_evolution_events": evolution_events,
        },
        "failure": {
            "affected_edges": int(schedule.affected.sum()),
            "total_edges": int(schedule.n_edges),
            "affected_fraction": float(schedule.affected.mean()) if schedule.n_edges else 0.0,
        },
        "pfs": pfs_totals,
        "pfs_refresh_waves": waves,
    }
    tables = {
        "latency": latency_rows,
        "jitter": jitter_rows,
        "pfs_counters": pfs_rows,
        "dabnet_rounds": [{"round": k, "iul_changes": a, "blocks": b, "vagrants": v, "mean_fu_degree": g}
                          for k, (a, b, v, g) in enumerate(zip(iul_changes, block_counts, vagrant_counts,
                                                                 fu_degrees))],
    }
    return MetricsReport(summary, traces, audit, tables)
