"""Run orchestration: build a configured system, drive it to completion,
collect reports; seed fan-out and parameter sweeps.

Each run is single-threaded and deterministic; sweep points and seeds run in
separate processes with no shared state.
"""

import itertools
import multiprocessing
import os
import random

from . import config as configmod
from . import metrics as metricsmod
from . import routing
from . import topology as topomod
from . import workload as workloadmod
from .engine import Simulator, Channel, DeadlockError, PS_PER_NS, ns_to_ps
from .host import Host, RecvFlow
from .metrics import FlowRecord, RunMetrics
from .packets import FlowKey, DATA, ACK, DEFAULT_DST_PORT
from .switchnode import CongestionParams, Switch
from .util import derive_seed

BASE_SRC_PORT = 40000


def build_topology(cfg, seed):
    kind = cfg["topology.kind"]
    bw = int(cfg["network.bandwidth_gbps"] * 1e9)
    lat = cfg["network.latency_ns"]
    if kind == "fat_tree":
        topo = topomod.build_fat_tree(cfg["topology.pods"],
                                      cfg["topology.hosts_per_tor"],
                                      configmod.taper_value(cfg),
                                      bandwidth_bps=bw, latency_ns=lat)
    elif kind == "dragonfly":
        topo = topomod.build_dragonfly(cfg["topology.groups"],
                                       cfg["topology.switches_per_group"],
                                       cfg["topology.hosts_per_switch"],
                                       cfg["topology.global_links_per_pair"],
                                       radix=cfg["topology.radix"] or None,
                                       bandwidth_bps=bw, latency_ns=lat)
    else:
        topo = topomod.build_star(cfg["topology.hosts"],
                                  bandwidth_bps=bw, latency_ns=lat)
    if cfg["failures.fraction"] > 0.0:
        fseed = cfg["failures.seed"]
        plan = topomod.FailurePlan(seed=(fseed if fseed >= 0 else seed),
                                   fraction=cfg["failures.fraction"],
                                   degrade_factor=cfg["failures.degrade_factor"])
        topo = topomod.inject_failures(topo, plan)
    return topo


def build_workload(cfg, topo, seed):
    kind = cfg["workload.kind"]
    hosts = topo.hosts
    group_of = None
    if topo.kind == "fat_tree" and cfg["workload.exclude_same_tor"]:
        group_of = {h: topo.host_attach[h][0] for h in hosts}
    if kind == "permutation":
        return workloadmod.PermutationWorkload(hosts, cfg["workload.message_bytes"],
                                               seed, group_of=group_of)
    if kind == "all_to_all":
        return workloadmod.AllToAllWorkload(hosts, cfg["workload.message_bytes"])
    if kind == "random_uniform":
        dist = workloadmod.load_cdf(cfg["workload.cdf"])
        return workloadmod.RandomUniformWorkload(hosts, dist,
                                                 cfg["workload.flows_per_host"],
                                                 seed, group_of=group_of)
    pairs = configmod.workload_pairs(cfg)
    for s, d in pairs:
        if s not in topo.host_attach or d not in topo.host_attach:
            raise configmod.ConfigError("pair host %d not in topology" % max(s, d))
    return workloadmod.FixedPairsWorkload(pairs, cfg["workload.message_bytes"])


def base_rtt_ps(topo, mtu, bw_bps, lat_ns):
    """Idle-network round trip over the longest host pair path; used to scale
    the default resume timeout."""
    max_sw = max(topo.sw_dist.values(), default=0)
    links = max_sw + 2  # host uplink + fabric + host downlink
    ser = (mtu * 8 * 10 ** 12) // bw_bps
    one_way = links * (ser + ns_to_ps(lat_ns))
    return 2 * one_way


class Run:
    """One seeded simulation: topology, nodes, channels, workload, metrics."""

    def __init__(self, cfg, seed, trace_sink=None):
        self.cfg = cfg
        self.seed = seed
        self.trace = trace_sink
        self.sim = Simulator()
        self.topo = build_topology(cfg, seed)
        self.metrics = RunMetrics(bucket_us=cfg["metrics.bucket_us"])
        self.policy = cfg["routing.policy"]
        nic_mode = self.policy == routing.FLOWCUT_NIC

        bw = int(cfg["network.bandwidth_gbps"] * 1e9)
        mtu = cfg["network.mtu_bytes"]
        cparams = CongestionParams(
            alpha=cfg["routing.alpha"],
            rtt_ratio_threshold=cfg["routing.rtt_ratio_threshold"],
            rtt_growth_threshold=cfg["routing.rtt_growth_threshold"],
            t_per_byte=8.0 / bw)

        timeout_us = cfg["host.resume_timeout_us"]
        if timeout_us < 0:
            timeout_ps = 10 * base_rtt_ps(self.topo, mtu, bw,
                                          cfg["network.latency_ns"])
        else:
            timeout_ps = int(timeout_us * 1000) * PS_PER_NS

        flowlet_us = cfg["routing.flowlet_timeout_us"]
        if flowlet_us > 0:
            flowlet_ps = int(flowlet_us * 1000) * PS_PER_NS
        else:
            flowlet_ps = routing.FLOWLET_PRESETS_NS[
                cfg["routing.flowlet_preset"]] * PS_PER_NS

        self.nodes = {}
        for sw in self.topo.switches:
            self.nodes[sw] = Switch(
                self.sim, self, sw, self.topo, self.policy,
                random.Random(derive_seed(seed, "switch", sw)), cparams,
                table_capacity=cfg["routing.table_capacity"],
                partial_resume_ood=cfg["routing.partial_resume_ood"],
                flowlet_timeout_ps=flowlet_ps,
                flowcell_budget=cfg["routing.flowcell_budget_bytes"])
        for h in self.topo.hosts:
            self.nodes[h] = Host(
                self.sim, self, h, mtu,
                random.Random(derive_seed(seed, "host", h)),
                nic_mode=nic_mode, cparams=cparams,
                resume_timeout_ps=timeout_ps,
                control_loss_probability=cfg["host.xon_loss_probability"])

        buffer_bytes = cfg["network.buffer_bytes"]
        self.channels = []
        for link in self.topo.links:
            lat_ps = ns_to_ps(link.latency_ns)
            a, b = self.nodes[link.a], self.nodes[link.b]
            fwd = Channel(self.sim, (link.a, link.b), a, b,
                          link.a_port, link.b_port,
                          link.bandwidth_bps, lat_ps, buffer_bytes)
            rev = Channel(self.sim, (link.b, link.a), b, a,
                          link.b_port, link.a_port,
                          link.bandwidth_bps, lat_ps, buffer_bytes)
            fwd.reverse = rev
            rev.reverse = fwd
            self.channels.extend((fwd, rev))
            for ch, node in ((fwd, a), (rev, b)):
                if node.is_host:
                    node.uplink = ch
                else:
                    node.ports[ch.src_port] = ch

        self.attach = dict(self.topo.host_attach)
        self.workload = build_workload(cfg, self.topo, seed)
        self._src_port_counter = {}
        self._incomplete = set()
        if cfg["sim.invariant_checks"]:
            self.sim.after_event = self.check_invariants

    # -- flow lifecycle -----------------------------------------------------

    def _next_key(self, src, dst):
        n = self._src_port_counter.get(src, 0)
        self._src_port_counter[src] = n + 1
        return FlowKey(src, dst, BASE_SRC_PORT + n, DEFAULT_DST_PORT)

    def launch_flow(self, src, dst, size):
        key = self._next_key(src, dst)
        rec = FlowRecord(key, src, dst, size, self.sim.now_ps)
        self.metrics.flows[key] = rec
        if size == 0:
            rec.end_ps = self.sim.now_ps
            for spec in self.workload.on_complete(src):
                if spec is not None:
                    self.launch_flow(*spec)
            return
        self._incomplete.add(key)
        self.nodes[dst].recv[key] = RecvFlow(key, size)
        self.nodes[src].start_flow(key, size)

    def flow_completed(self, key):
        rec = self.metrics.flows[key]
        rec.end_ps = self.sim.now_ps
        self._incomplete.discard(key)
        for spec in self.workload.on_complete(rec.src):
            if spec is not None:
                self.launch_flow(*spec)

    # -- execution ----------------------------------------------------------

    def execute(self):
        for spec in self.workload.initial_flows():
            if spec is not None:
                self.launch_flow(*spec)
        final_ps = self.sim.run()
        if self._incomplete:
            stuck = []
            for key in sorted(self._incomplete, key=lambda k: k.wire):
                tx = self.nodes[key.src_addr].flows.get(key)
                state = "paused" if tx is not None and tx.paused else "blocked"
                stuck.append("%s src=%d dst=%d %s"
                             % (key.hash_hex, key.src_addr, key.dst_addr, state))
            raise DeadlockError(
                "event queue drained with %d unfinished flows" % len(stuck),
                stuck)
        self._finalize_records()
        return final_ps

    def _finalize_records(self):
        for key, rec in self.metrics.flows.items():
            if rec.size == 0:
                continue
            rs = self.nodes[rec.dst].recv[key]
            rec.ooo = rs.ooo
            rec.max_ood = rs.max_ood
            rec.packets = rs.expected
            tx = self.nodes[rec.src].flows[key]
            rec.paused_ps = sum(b - a for a, b in tx.paused_intervals)
            rec.drains = tx.drains
            if self.policy == routing.FLOWCUT:
                rec.reroutes = max(0, self.metrics.flowcut_creations.get(key, 1) - 1)
            else:
                rec.reroutes = tx.reroutes

    def table_max_occupancy(self):
        out = {}
        for sw in self.topo.switches:
            out[self.topo.name[sw]] = self.nodes[sw].max_occupancy
        return out

    # -- invariants (enabled via sim.invariant_checks) ----------------------

    def check_invariants(self):
        in_network_data = 0
        data_by_key = {}
        ack_by_key = {}
        for ch in self.channels:
            assert ch.credits >= 0, "negative credits on %s" % (ch.cid,)
            assert ch.credits + ch.owed_bytes + ch.wire_bytes == ch.buffer_bytes, \
                "credit conservation broken on %s" % (ch.cid,)
            uplink = ch.src.is_host
            downlink = ch.dst.is_host
            for pkt in ch.queued_packets():
                if pkt.kind == DATA:
                    in_network_data += pkt.size
                    if not uplink:
                        data_by_key[pkt.key] = data_by_key.get(pkt.key, 0) + pkt.size
                elif pkt.kind == ACK:
                    ack_by_key[pkt.key] = ack_by_key.get(pkt.key, 0) + pkt.acked_bytes
            if ch.in_service is not None:
                pkt = ch.in_service
                if pkt.kind == DATA:
                    in_network_data += pkt.size
                    if not uplink:
                        data_by_key[pkt.key] = data_by_key.get(pkt.key, 0) + pkt.size
                elif pkt.kind == ACK:
                    ack_by_key[pkt.key] = ack_by_key.get(pkt.key, 0) + pkt.acked_bytes
            for pkt in ch.propagating:
                if pkt.kind == DATA:
                    in_network_data += pkt.size
                    if not uplink and not downlink:
                        data_by_key[pkt.key] = data_by_key.get(pkt.key, 0) + pkt.size
                elif pkt.kind == ACK:
                    ack_by_key[pkt.key] = ack_by_key.get(pkt.key, 0) + pkt.acked_bytes
        assert self.metrics.injected_bytes == self.metrics.delivered_bytes + in_network_data, \
            "losslessness broken: injected != delivered + in flight"
        if self.policy == routing.FLOWCUT:
            for sw in self.topo.switches:
                for key, entry in self.nodes[sw].table.items():
                    if not entry.is_ingress:
                        continue
                    outstanding = data_by_key.get(key, 0) + ack_by_key.get(key, 0)
                    assert entry.inflight_bytes == outstanding, \
                        ("ingress inflight mismatch for %s: counter=%d census=%d"
                         % (key.hash_hex, entry.inflight_bytes, outstanding))


def execute_run(cfg, seed, out_dir=None, trace_path=None):
    """One seeded run; returns the summary dict, writing report files if asked."""
    sink = None
    fh = None
    if trace_path:
        fh = open(trace_path, "w")
        sink = lambda line: fh.write(line + "\n")
    try:
        run = Run(cfg, seed, trace_sink=sink)
        final_ps = run.execute()
    finally:
        if fh is not None:
            fh.close()
    summary = metricsmod.summary_dict(
        run.metrics, configmod.digest(cfg), cfg["routing.policy"],
        cfg["topology.kind"], seed, run.table_max_occupancy(), final_ps)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "flows.csv"), "w") as f:
            f.write(metricsmod.flows_csv(run.metrics))
        with open(os.path.join(out_dir, "summary.json"), "w") as f:
            f.write(metricsmod.summary_json(summary))
    return summary


def run_all_seeds(cfg, out_root=None, trace=False):
    summaries = []
    for seed in cfg["seeds"]:
        out_dir = os.path.join(out_root, "seed_%d" % seed) if out_root else None
        trace_path = (os.path.join(out_dir, "trace.txt")
                      if trace and out_dir else None)
        if trace_path:
            os.makedirs(out_dir, exist_ok=True)
        summaries.append(execute_run(cfg, seed, out_dir, trace_path))
    return summaries


def _sweep_worker(args):
    cfg, seed = args
    return execute_run(cfg, seed)


SWEEP_CSV_FIELDS = ("seed", "avg_fct_ns", "p99_fct_ns", "ooo_fraction",
                    "draining_impact", "drains", "makespan_ns")


def sweep(cfg, axes, jobs=None):
    """Cartesian sweep; one row per grid cell per seed.

    `axes` is an ordered dict of config key -> list of values. Returns
    (header_fields, rows) where each row leads with the axis values.
    """
    for key in axes:
        if key not in configmod.SCHEMA:
            raise configmod.ConfigError("sweep axis %r is not a config key" % (key,))
    names = list(axes)
    grid = list(itertools.product(*(axes[k] for k in names)))
    jobs = jobs or os.cpu_count() or 1
    tasks = []
    for point in grid:
        pcfg = dict(cfg)
        for key, value in zip(names, point):
            configmod.set_value(pcfg, key, value if isinstance(value, str) else str(value))
        configmod.validate(pcfg)
        for seed in pcfg["seeds"]:
            tasks.append((point, dict(pcfg), seed))
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(jobs) as pool:
            results = pool.map(_sweep_worker, [(c, s) for _, c, s in tasks])
    else:
        results = [_sweep_worker((c, s)) for _, c, s in tasks]
    header = tuple(names) + SWEEP_CSV_FIELDS
    rows = []
    for (point, _, seed), summary in zip(tasks, results):
        rows.append(tuple(point) + (seed, summary["avg_fct_ns"],
                                    summary["p99_fct_ns"],
                                    summary["ooo_fraction"],
                                    summary["draining_impact"],
                                    summary["drains"],
                                    summary["makespan_ns"]))
    return header, rows


def sweep_csv(header, rows):
    lines = [",".join(str(h) for h in header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"
