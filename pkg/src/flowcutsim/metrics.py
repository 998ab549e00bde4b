"""Per-flow and per-run statistics, plus the machine-readable result files.

Output schema (stable, part of the test contract):
  flows.csv    header `flow_key_hash,src,dst,size_bytes,start_ns,end_ns,fct_ns,
               ooo_packets,paused_ns,drains`, one row per flow.
  summary.json sorted keys, fixed float rounding; byte-identical across
               repeated identical runs.
"""

import json
import math

from .engine import PS_PER_NS

FLOWS_CSV_HEADER = ("flow_key_hash,src,dst,size_bytes,start_ns,end_ns,"
                    "fct_ns,ooo_packets,paused_ns,drains")

DEFAULT_BUCKET_US = 10


def percentile(values, q):
    """Nearest-rank percentile, no interpolation."""
    if not values:
        raise ValueError("percentile of an empty value set")
    if not 0 <= q <= 100:
        raise ValueError("q must be in [0, 100]")
    ordered = sorted(values)
    if q == 0:
        return ordered[0]
    rank = math.ceil(q * len(ordered) / 100.0)
    return ordered[rank - 1]


class FlowRecord:
    __slots__ = ("key", "src", "dst", "size", "start_ps", "end_ps", "ooo",
                 "max_ood", "paused_ps", "drains", "reroutes", "packets")

    def __init__(self, key, src, dst, size, start_ps):
        self.key = key
        self.src = src
        self.dst = dst
        self.size = size
        self.start_ps = start_ps
        self.end_ps = start_ps
        self.ooo = 0
        self.max_ood = 0
        self.paused_ps = 0
        self.drains = 0
        self.reroutes = 0
        self.packets = 0

    @property
    def fct_ps(self):
        return self.end_ps - self.start_ps


class RunMetrics:
    """Counters written by the run's event loop, merged read-only afterward."""

    def __init__(self, bucket_us=DEFAULT_BUCKET_US):
        self.flows = {}              # key -> FlowRecord
        self.injected_bytes = 0
        self.delivered_bytes = 0
        self.delivered_packets = 0
        self.ack_wire_bytes = 0
        self.stale_acks = 0
        self.stale_controls = 0
        self.lost_controls = 0
        self.timeout_resumes = 0
        self.table_overflows = 0
        self.drains_triggered = 0
        self.flowcut_creations = {}  # key -> ingress entry creations
        self.bucket_ps = bucket_us * 1000 * PS_PER_NS
        self.buckets = {}

    def note_flowcut_created(self, key):
        self.flowcut_creations[key] = self.flowcut_creations.get(key, 0) + 1

    def deliver(self, size, now_ps):
        self.delivered_bytes += size
        self.delivered_packets += 1
        b = now_ps // self.bucket_ps
        self.buckets[b] = self.buckets.get(b, 0) + size

    def total_ooo(self):
        return sum(r.ooo for r in self.flows.values())


def ooo_fraction(metrics):
    """Mismatched-PSN arrivals over data packets delivered."""
    if metrics.delivered_packets == 0:
        return 0.0
    return metrics.total_ooo() / metrics.delivered_packets


def draining_impact(metrics):
    """Mean over flows of (paused time / flow lifetime); 0 with no draining."""
    fracs = []
    for rec in metrics.flows.values():
        life = rec.fct_ps
        if life > 0:
            fracs.append(rec.paused_ps / life)
        else:
            fracs.append(0.0)
    if not fracs:
        return 0.0
    return sum(fracs) / len(fracs)


def _ns(ps):
    return "%.3f" % (ps / PS_PER_NS)


def flows_csv(metrics):
    rows = [FLOWS_CSV_HEADER]
    for key in sorted(metrics.flows, key=lambda k: k.wire):
        r = metrics.flows[key]
        rows.append("%s,%d,%d,%d,%s,%s,%s,%d,%s,%d"
                    % (key.hash_hex, r.src, r.dst, r.size, _ns(r.start_ps),
                       _ns(r.end_ps), _ns(r.fct_ps), r.ooo, _ns(r.paused_ps),
                       r.drains))
    return "\n".join(rows) + "\n"


def summary_dict(metrics, config_digest, policy, topology_kind, seed,
                 table_max_occupancy, makespan_ps):
    flows = list(metrics.flows.values())
    fcts = [r.fct_ps for r in flows]
    timeline = [[int(b * metrics.bucket_ps // PS_PER_NS), metrics.buckets[b]]
                for b in sorted(metrics.buckets)]
    reroutes = sum(r.reroutes for r in flows)
    summary = {
        "schema_version": 1,
        "config_digest": config_digest,
        "policy": policy,
        "topology": topology_kind,
        "seed": seed,
        "flow_count": len(flows),
        "makespan_ns": round(makespan_ps / PS_PER_NS, 3),
        "avg_fct_ns": round(sum(fcts) / len(fcts) / PS_PER_NS, 3) if fcts else 0.0,
        "p99_fct_ns": round(percentile(fcts, 99) / PS_PER_NS, 3) if fcts else 0.0,
        "ooo_fraction": round(ooo_fraction(metrics), 9),
        "ooo_packets": metrics.total_ooo(),
        "max_ood": max((r.max_ood for r in flows), default=0),
        "draining_impact": round(draining_impact(metrics), 9),
        "drains": sum(r.drains for r in flows),
        "reroutes": reroutes,
        "injected_bytes": metrics.injected_bytes,
        "delivered_bytes": metrics.delivered_bytes,
        "delivered_packets": metrics.delivered_packets,
        "ack_wire_bytes": metrics.ack_wire_bytes,
        "stale_acks": metrics.stale_acks,
        "stale_controls": metrics.stale_controls,
        "lost_controls": metrics.lost_controls,
        "timeout_resumes": metrics.timeout_resumes,
        "table_overflows": metrics.table_overflows,
        "max_table_occupancy": {name: occ for name, occ in
                                sorted(table_max_occupancy.items())},
        "max_table_occupancy_overall": max(table_max_occupancy.values(), default=0),
        "throughput_timeline_ns_bytes": timeline,
    }
    return summary


def summary_json(summary):
    return json.dumps(summary, sort_keys=True, indent=1) + "\n"
