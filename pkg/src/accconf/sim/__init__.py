"""Desk-scale ICN cache simulator."""

from .cache import LRUCache
from .engine import SimConfig, SimReport, Stack, load_config, run_simulation, simulate, summary_csv, write_reports
from .topology import Topology, TopologySpec, generate_topology, line_topology
from .workload import Workload, sample_popularity

__all__ = [
    "LRUCache", "SimConfig", "SimReport", "Stack", "Topology", "TopologySpec", "Workload",
    "generate_topology", "line_topology", "load_config", "run_simulation", "sample_popularity",
    "simulate", "summary_csv", "write_reports",
]
