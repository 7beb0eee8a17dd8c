"""Synthetic two-level topologies: Waxman AS graph, Barabasi-Albert routers per AS."""

import math
from dataclasses import dataclass, field

import networkx as nx

from ..errors import ConfigError
from ..rng import DeterministicRNG


@dataclass
class TopologySpec:
    n_as: int = 10
    routers_per_as: int = 10
    edge_router_count: int = 2
    clients_per_edge: int = 5
    seed: int = 0
    waxman_alpha: float = 0.15  # link probability scale
    waxman_beta: float = 0.2    # distance sensitivity
    ba_m: int = 2
    core_bw: tuple = (1e9, 4e9)
    core_delay: tuple = (0.5e-3, 2e-3)
    access_bw: float = 20e6
    access_delay: float = 0.1e-3
    provider_hops: tuple = (6, 8)

    def __post_init__(self):
        for name in ("n_as", "routers_per_as", "edge_router_count", "clients_per_edge", "ba_m"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        self.core_bw = tuple(self.core_bw)
        self.core_delay = tuple(self.core_delay)
        self.provider_hops = tuple(self.provider_hops)
        if self.edge_router_count > self.n_as * self.routers_per_as:
            raise ConfigError("more edge routers than routers")


@dataclass
class Topology:
    """Undirected graph; nodes carry ``kind`` and edges ``bandwidth`` (bit/s) and ``delay`` (s)."""

    graph: nx.Graph
    clients: list
    provider: object
    edge_routers: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    _routes: dict = field(default_factory=dict, repr=False)

    def route(self, client):
        """Hop-count shortest path [client, edge router, ..., provider]."""
        if not self._routes:
            paths = nx.single_source_shortest_path(self.graph, self.provider)
            self._routes = {c: list(reversed(paths[c])) for c in self.clients}
        return self._routes[client]

    def routers(self):
        return [n for n, k in self.graph.nodes(data="kind") if k == "router"]

    def link(self, u, v):
        return self.graph.edges[u, v]

    def edge_list(self):
        return sorted((min(u, v), max(u, v), d["bandwidth"], d["delay"]) for u, v, d in self.graph.edges(data=True))

    def validate(self):
        g = self.graph
        if not nx.is_connected(g):
            raise ConfigError("topology is not connected")
        for c in self.clients:
            nbrs = list(g.neighbors(c))
            if len(nbrs) != 1 or g.nodes[nbrs[0]]["kind"] != "router":
                raise ConfigError(f"client {c} must attach to exactly one router")
        return self


def line_topology(n_routers=1, bandwidth=1e9, delay=1e-3, access_bw=20e6, access_delay=0.1e-3,
                  provider_bw=None, provider_delay=None):
    """client - r0 - ... - r{n-1} - provider; handy for hand-computed latency checks."""
    g = nx.Graph()
    g.add_node("c0", kind="client")
    routers = [f"r{i}" for i in range(n_routers)]
    for r in routers:
        g.add_node(r, kind="router")
    g.add_node("p", kind="provider")
    g.add_edge("c0", routers[0], bandwidth=access_bw, delay=access_delay)
    for a, b in zip(routers, routers[1:]):
        g.add_edge(a, b, bandwidth=bandwidth, delay=delay)
    g.add_edge(routers[-1], "p", bandwidth=provider_bw or bandwidth,
               delay=delay if provider_delay is None else provider_delay)
    return Topology(g, ["c0"], "p", [routers[0]]).validate()


def _waxman(n, alpha, beta, rng):
    pos = [(rng.random(), rng.random()) for _ in range(n)]
    L = math.sqrt(2.0)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for u in range(n):
        for v in range(u + 1, n):
            d = math.dist(pos[u], pos[v])
            if rng.random() < alpha * math.exp(-d / (beta * L)):
                g.add_edge(u, v)
    # join components by their closest node pair
    comps = sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])
    while len(comps) > 1:
        a, b = comps[0], comps[1]
        u, v = min(((u, v) for u in a for v in b), key=lambda e: (math.dist(pos[e[0]], pos[e[1]]), e))
        g.add_edge(u, v)
        comps = [a + b] + comps[2:]
    return g


def _barabasi_albert(n, m, rng):
    if n <= m + 1:
        return nx.complete_graph(n)
    return nx.barabasi_albert_graph(n, m, seed=rng.getrandbits(32))


def generate_topology(spec):
    rng = DeterministicRNG(spec.seed, "topology")
    g = nx.Graph()
    members = []
    for a in range(spec.n_as):
        local = _barabasi_albert(spec.routers_per_as, spec.ba_m, rng)
        names = [f"r{a * spec.routers_per_as + i}" for i in range(spec.routers_per_as)]
        members.append(names)
        for name in names:
            g.add_node(name, kind="router", as_id=a)
        for u, v in sorted(local.edges()):
            g.add_edge(names[u], names[v])
    for a, b in sorted(_waxman(spec.n_as, spec.waxman_alpha, spec.waxman_beta, rng).edges()):
        g.add_edge(rng.choice(members[a]), rng.choice(members[b]))
    for u, v in sorted(g.edges()):
        g.edges[u, v]["bandwidth"] = rng.uniform(*spec.core_bw)
        g.edges[u, v]["delay"] = rng.uniform(*spec.core_delay)

    warnings = []
    edges, home = _place_provider(g, spec, rng, warnings)
    g.add_node("p", kind="provider")
    g.add_edge(home, "p", bandwidth=rng.uniform(*spec.core_bw), delay=rng.uniform(*spec.core_delay))
    clients = []
    for e in edges:
        for _ in range(spec.clients_per_edge):
            c = f"c{len(clients)}"
            g.add_node(c, kind="client")
            g.add_edge(e, c, bandwidth=spec.access_bw, delay=spec.access_delay)
            clients.append(c)
    return Topology(g, clients, "p", edges, warnings).validate()


def _place_provider(g, spec, rng, warnings, attempts=50):
    """Pick edge routers and a provider router whose hop distance (+1 for the provider link) is in band."""
    lo, hi = spec.provider_hops
    routers = sorted(g.nodes, key=lambda n: int(n[1:]))
    by_degree = sorted(routers, key=lambda n: (g.degree(n), int(n[1:])))
    pool = by_degree[:max(spec.edge_router_count, len(routers) // 2)]
    best = None
    for _ in range(attempts):
        edges = sorted(rng.sample(pool, spec.edge_router_count), key=lambda n: int(n[1:]))
        dist = [nx.single_source_shortest_path_length(g, e) for e in edges]
        ok = [r for r in routers if r not in edges and all(lo <= d[r] + 1 <= hi for d in dist)]
        if ok:
            return edges, rng.choice(ok)
        cands = [r for r in routers if r not in edges] or routers
        far = max(cands, key=lambda r: (min(d[r] for d in dist), -int(r[1:])))
        score = min(d[far] for d in dist)
        if best is None or score > best[0]:
            best = (score, edges, far)
    score, edges, far = best
    warnings.append(f"provider hop band {lo}-{hi} infeasible; placed at {score + 1} hops")
    return edges, far
