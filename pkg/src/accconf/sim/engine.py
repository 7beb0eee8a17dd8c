"""Event-driven chunk-level simulation of AccConF, plain NDN and a cache-free baseline.

Each client runs closed-loop: pick an object by popularity, fetch its chunks
one at a time (AccConF fetches the enabling-block chunks first), then pick the
next object. An interest walks from the edge router toward the provider and is
answered by the first router holding the chunk; the data retraces the path and
every router on the way stores it. Per-hop delay is store-and-forward
transmission plus propagation, without queueing.

Each chunk request is resolved in one step when issued. Routers record when
in-flight data will reach them (``available_at``); a later interest finding
such an entry waits for it, which is how pending-interest aggregation is
modelled. With random chunk numbering aggregation is off and such an
interest is forwarded upstream.
"""

import csv
import enum
import hashlib
import heapq
import io
import json
import math
import os
from array import array
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigError
from ..rng import DeterministicRNG
from ..wire import atomic_write
from .cache import LRUCache
from .topology import TopologySpec, generate_topology
from .workload import Workload, sample_popularity


class Stack(str, enum.Enum):
    ACCCONF = "accconf"
    NDN = "ndn"
    UDP = "udp"


@dataclass
class SimConfig:
    topology: TopologySpec = field(default_factory=TopologySpec)
    workload: Workload = field(default_factory=Workload)
    stack: Stack = Stack.NDN
    seed: int = 0
    duration: float = 60.0
    cache_fraction: float = 0.05
    cache_bytes: int = None  # overrides cache_fraction when set
    chunk_size: int = 1436
    interest_bytes: int = 50
    eb_bytes: int = 120_000
    eb_timeout: float = 30.0
    numbering: str = "sequential"
    record_cache_trace: bool = False

    def __post_init__(self):
        self.stack = Stack(self.stack)
        if isinstance(self.topology, dict):
            self.topology = TopologySpec(**self.topology)
        if isinstance(self.workload, dict):
            self.workload = Workload(**self.workload)
        if self.numbering not in ("sequential", "random"):
            raise ConfigError(f"unknown numbering {self.numbering!r}")
        if self.chunk_size < 1 or self.interest_bytes < 1:
            raise ConfigError("chunk_size and interest_bytes must be positive")
        if self.duration <= 0:
            raise ConfigError("duration must be positive")
        if not 0 <= self.cache_fraction <= 1:
            raise ConfigError("cache_fraction must lie in [0, 1]")
        if self.eb_bytes < 1 or self.eb_timeout <= 0:
            raise ConfigError("eb_bytes and eb_timeout must be positive")

    @property
    def capacity(self):
        if self.cache_bytes is not None:
            return self.cache_bytes
        return int(self.cache_fraction * self.workload.n_objects * self.workload.object_bytes)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        data.pop("stacks", None)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        d = asdict(self)
        d["stack"] = self.stack.value
        return d


@dataclass
class SimReport:
    stack: str
    seed: int
    duration: float
    object_bytes: int
    eb_bytes: int
    clients: list
    downloads: list
    bytes_received: list
    partial_bytes: list
    sample_client: np.ndarray
    sample_object: np.ndarray
    sample_is_eb: np.ndarray
    sample_chunk: np.ndarray
    latency: np.ndarray
    router_hits: dict
    bytes_transferred: int
    numbering: str = "sequential"
    warnings: list = field(default_factory=list)
    caches: dict = field(default=None, repr=False, compare=False)

    @property
    def mean_downloads(self):
        return float(np.mean(self.downloads)) if self.downloads else 0.0

    @property
    def per_object_bytes(self):
        return self.object_bytes + (self.eb_bytes if self.stack == Stack.ACCCONF.value else 0)

    @property
    def hit_ratio(self):
        hits = sum(h for h, _ in self.router_hits.values())
        total = sum(h + m for h, m in self.router_hits.values())
        return hits / total if total else 0.0

    def quantile(self, q):
        return float(np.quantile(self.latency, q, method="inverted_cdf")) if len(self.latency) else math.nan

    def ecdf(self):
        """(latency values, cumulative probability) over distinct sampled latencies."""
        values, counts = np.unique(self.latency, return_counts=True)
        cum = np.cumsum(counts) / counts.sum()
        if len(cum):
            cum[-1] = 1.0
        return values, cum

    def chunk_name(self, i):
        return _render_name(int(self.sample_object[i]), bool(self.sample_is_eb[i]),
                            int(self.sample_chunk[i]), self.numbering)

    def summary_row(self):
        return {
            "stack": self.stack,
            "mean_downloads": f"{self.mean_downloads:.6f}",
            "p50_latency": f"{self.quantile(0.5):.9f}",
            "p90_latency": f"{self.quantile(0.9):.9f}",
            "p99_latency": f"{self.quantile(0.99):.9f}",
            "hit_ratio": f"{self.hit_ratio:.6f}",
        }

    def csv_tables(self):
        lat = io.StringIO()
        w = csv.writer(lat, lineterminator="\n")
        w.writerow(["client_id", "chunk_name", "latency_sec"])
        for i in range(len(self.latency)):
            w.writerow([self.clients[self.sample_client[i]], self.chunk_name(i), f"{self.latency[i]:.9f}"])
        ecdf = io.StringIO()
        w = csv.writer(ecdf, lineterminator="\n")
        w.writerow(["latency", "cumulative_prob"])
        for x, p in zip(*self.ecdf()):
            w.writerow([f"{x:.9f}", f"{p:.9f}"])
        return {"latency_samples.csv": lat.getvalue(), "ecdf.csv": ecdf.getvalue(),
                "summary.csv": summary_csv([self])}

    def to_bytes(self):
        tables = self.csv_tables()
        extra = json.dumps({"downloads": self.downloads, "bytes_received": self.bytes_received,
                            "router_hits": self.router_hits, "bytes_transferred": self.bytes_transferred},
                           sort_keys=True)
        return "".join(tables[k] for k in sorted(tables)).encode() + extra.encode()


def summary_csv(reports):
    out = io.StringIO()
    cols = ["stack", "mean_downloads", "p50_latency", "p90_latency", "p99_latency", "hit_ratio"]
    w = csv.DictWriter(out, cols, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.summary_row())
    return out.getvalue()


def write_reports(reports, out_dir):
    """summary.csv over all runs; per-stack latency/eCDF tables (bare names for a single run)."""
    os.makedirs(out_dir, exist_ok=True)
    atomic_write(os.path.join(out_dir, "summary.csv"), summary_csv(reports).encode())
    for r in reports:
        tables = r.csv_tables()
        for name in ("latency_samples.csv", "ecdf.csv"):
            fname = name if len(reports) == 1 else f"{r.stack}_{name}"
            atomic_write(os.path.join(out_dir, fname), tables[name].encode())


def _render_name(obj, is_eb, idx, numbering):
    kind, group = ("premium", "group1") if is_eb else ("movie", "category1")
    title = f"object{obj:04d}"
    if numbering == "random" and idx > 0:
        cid = hashlib.sha256(f"{title}/{kind}/{idx}".encode()).hexdigest()[:16]
    else:
        cid = str(idx + 1).zfill(3)
    return f"/provider.example/{kind}/{group}/{title}/V1/{cid}"


class _PathModel:
    """Cumulative link costs from a client outward along its route.

    Index h covers the links up to and including router h; the last index
    reaches the provider.
    """

    def __init__(self, topology, client, caches):
        route = topology.route(client)
        self.routers = route[1:-1]
        self.caches = [caches[r] for r in self.routers]
        self.inv, self.prop = [], []
        acc_inv = acc_prop = 0.0
        for u, v in zip(route, route[1:]):
            link = topology.link(u, v)
            acc_inv += 1.0 / link["bandwidth"]
            acc_prop += link["delay"]
            self.inv.append(acc_inv)
            self.prop.append(acc_prop)

    def one_way(self, level, nbytes):
        return 8 * nbytes * self.inv[level] + self.prop[level]

    def offsets(self, nbytes):
        return [self.one_way(h, nbytes) for h in range(len(self.inv))]


def run_simulation(topology, workload, stack, config):
    stack = Stack(stack)
    caching = stack is not Stack.UDP
    aggregate = config.numbering == "sequential"
    cs = config.chunk_size
    n_content = max(1, math.ceil(workload.object_bytes / cs))
    n_eb = math.ceil(config.eb_bytes / cs) if stack is Stack.ACCCONF else 0
    last_content = workload.object_bytes - cs * (n_content - 1)
    last_eb = config.eb_bytes - cs * (n_eb - 1)

    routers = topology.routers()
    caches = {r: LRUCache(config.capacity, config.record_cache_trace) for r in routers}
    clients = list(topology.clients)
    paths = [_PathModel(topology, c, caches) for c in clients]
    client_rngs = [DeterministicRNG(config.seed, f"client-{c}") for c in clients]
    ibytes = config.interest_bytes
    # per client: interest arrival offsets, and data return offsets keyed by chunk size
    up = [pm.offsets(ibytes) for pm in paths]
    down = [{size: pm.offsets(size) for size in {cs, last_content, last_eb} if size > 0} for pm in paths]

    downloads = [0] * len(clients)
    received = [0] * len(clients)
    partial = [0] * len(clients)
    s_client, s_obj, s_eb, s_chunk = array("i"), array("i"), array("b"), array("i")
    s_lat = array("d")
    transferred = 0
    inf = math.inf
    eb_timeout = config.eb_timeout
    duration = config.duration
    # per client: [object rank, in enabling-block phase, next chunk index]
    state = [[sample_popularity(workload, client_rngs[i]), n_eb > 0, 0] for i in range(len(clients))]
    heap = [(0.0, i) for i in range(len(clients))]
    heapq.heapify(heap)

    while heap:
        now, i = heapq.heappop(heap)
        if now >= duration:
            continue
        st = state[i]
        obj, is_eb, idx = st
        name = (obj, is_eb, idx)
        if is_eb:
            size = last_eb if idx == n_eb - 1 else cs
        else:
            size = last_content if idx == n_content - 1 else cs
        pm = paths[i]
        ups = up[i]
        top = len(pm.caches)
        level, wait = top, None
        if caching:
            for h, cache in enumerate(pm.caches):
                arrive = now + ups[h]
                entry = cache.lookup(name, arrive, aggregate)
                if entry is not None:
                    level, wait = h, max(0.0, entry[1] - arrive)
                    break
        if wait is None:
            wait = 0.0
        # latency from path offsets, so equal paths give bit-identical latencies
        latency = ups[level] + wait + down[i][size][level]
        depart = now + ups[level] + wait
        transferred += (ibytes + size) * (level + 1)
        downs = down[i][size]
        if caching:
            ttl = eb_timeout if is_eb else inf
            base = depart + downs[level]
            for j in range(level - 1, -1, -1):
                at = base - downs[j]
                pm.caches[j].insert(name, size, at, at + ttl)
        finish = now + latency
        s_client.append(i)
        s_obj.append(obj)
        s_eb.append(is_eb)
        s_chunk.append(idx)
        s_lat.append(latency)
        received[i] += size
        partial[i] += size

        idx += 1
        if is_eb and idx == n_eb:
            st[1] = False
            st[2] = 0
        elif not is_eb and idx == n_content:
            downloads[i] += 1
            partial[i] = 0
            st[0] = sample_popularity(workload, client_rngs[i])
            st[1] = n_eb > 0
            st[2] = 0
        else:
            st[2] = idx
        heapq.heappush(heap, (finish, i))

    return SimReport(
        stack=stack.value, seed=config.seed, duration=config.duration,
        object_bytes=workload.object_bytes, eb_bytes=config.eb_bytes if n_eb else 0,
        clients=clients, downloads=downloads, bytes_received=received, partial_bytes=partial,
        sample_client=np.array(s_client, dtype=np.int32),
        sample_object=np.array(s_obj, dtype=np.int32), sample_is_eb=np.array(s_eb, dtype=bool),
        sample_chunk=np.array(s_chunk, dtype=np.int32), latency=np.array(s_lat, dtype=float),
        router_hits={r: (c.hits, c.misses) for r, c in caches.items()},
        bytes_transferred=transferred, numbering=config.numbering,
        warnings=list(topology.warnings), caches=caches,
    )


def simulate(config, stacks=None):
    """Generate the topology from ``config`` and run each stack on it; returns reports."""
    topology = generate_topology(config.topology)
    stacks = [config.stack] if stacks is None else stacks
    return [run_simulation(topology, config.workload, s, config) for s in stacks]


def load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    stacks = data.get("stacks")
    return SimConfig.from_dict(data), stacks
