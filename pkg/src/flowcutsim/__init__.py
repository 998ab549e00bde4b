"""Deterministic packet-level simulator for flowcut switching: adaptive
routing with guaranteed in-order delivery via in-flight draining, plus
baseline policies, data-center topologies, workload generators, failure
injection, and analytic resource models."""

__version__ = "0.1.0"

from .engine import Simulator, Channel, SimulationError, DeadlockError
from .topology import (build_fat_tree, build_dragonfly, build_star,
                       inject_failures, FailurePlan, Topology, TopologyError)
from .switchnode import CongestionParams, normalized_rtt
from .analytics import (ResourceModelInputs, active_flows, memory_occupancy,
                        ack_overhead)
from .metrics import percentile, ooo_fraction, draining_impact
from .runner import Run, execute_run, run_all_seeds, sweep

__all__ = [
    "Simulator", "Channel", "SimulationError", "DeadlockError",
    "build_fat_tree", "build_dragonfly", "build_star", "inject_failures",
    "FailurePlan", "Topology", "TopologyError",
    "CongestionParams", "normalized_rtt",
    "ResourceModelInputs", "active_flows", "memory_occupancy", "ack_overhead",
    "percentile", "ooo_fraction", "draining_impact",
    "Run", "execute_run", "run_all_seeds", "sweep",
]
