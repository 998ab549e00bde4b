"""Per-switch datapath: output queues, routing dispatch, flowcut table,
ack accounting, RTT-based congestion estimation, and the drain controller.

Only the ingress switch (the one attached to the flow's source) keeps RTT
state and may trigger draining; intermediate switches keep just
{in_port, out_port, inflight} so acks can retrace the data path and the
path stays pinned while bytes are in flight.
"""

from .engine import SimulationError
from .packets import (DATA, ACK, NIC_ACK, XOFF, XON, MAX_HOP_COUNT,
                      AckPacket, CtrlPacket)
from . import routing

# Drain controller states.
ACTIVE = 0
DRAINING = 1
AWAIT_RESUME = 2  # partial-resume mode: XON sent early, reroute on next packet

FLOWCUT_STATE_BYTES = 11  # per-flow switch memory in the resource model


class CongestionParams:
    """Drain-trigger knobs; t_per_byte is seconds per byte (inverse link rate)."""

    __slots__ = ("alpha", "rtt_ratio_threshold", "rtt_growth_threshold",
                 "t_per_byte", "t_ps_per_byte")

    def __init__(self, alpha=0.9, rtt_ratio_threshold=4.0,
                 rtt_growth_threshold=0.5, t_per_byte=1.0 / 25e9):
        if not (0.0 < alpha <= 1.0):
            raise ValueError("alpha must be in (0, 1]")
        if rtt_ratio_threshold < 1.0 or rtt_growth_threshold <= 0.0 or t_per_byte <= 0.0:
            raise ValueError("congestion parameters must be strictly positive")
        self.alpha = alpha
        self.rtt_ratio_threshold = rtt_ratio_threshold
        self.rtt_growth_threshold = rtt_growth_threshold
        self.t_per_byte = t_per_byte
        self.t_ps_per_byte = t_per_byte * 1e12


def new_rtt_floor():
    """Per-switch minimum observed base RTT, one slot per hop count 0..15."""
    return [None] * (MAX_HOP_COUNT + 1)


def normalized_rtt(measured_ps, packet_size, hops, t_ps_per_byte, floor):
    """measured / (r_min(h) + p*h*t), clamped to >= 1; updates the floor.

    The first observation for a hop count seeds r_min(h) = measured - p*h*t
    and reports 1.0.
    """
    if hops < 0 or hops > MAX_HOP_COUNT:
        raise SimulationError("hop count %d outside the 4-bit wire range" % hops)
    base = packet_size * hops * t_ps_per_byte
    corrected = measured_ps - base
    cur = floor[hops]
    if cur is None:
        floor[hops] = corrected
        return 1.0
    if corrected < cur:
        floor[hops] = corrected
        cur = corrected
    denom = cur + base
    if denom <= 0:
        return 1.0
    r = measured_ps / denom
    return r if r > 1.0 else 1.0


class FlowcutEntry:
    __slots__ = ("key", "out_port", "in_channel", "inflight_bytes",
                 "inflight_pkts", "drain_state", "rtt_ema", "last_norm",
                 "delta_ema", "is_ingress")

    def __init__(self, key, out_port, in_channel, is_ingress):
        self.key = key
        self.out_port = out_port
        self.in_channel = in_channel
        self.inflight_bytes = 0
        self.inflight_pkts = 0
        self.drain_state = ACTIVE
        self.rtt_ema = None
        self.last_norm = 0.0
        self.delta_ema = 0.0
        self.is_ingress = is_ingress

    def reset_congestion_state(self):
        self.rtt_ema = None
        self.last_norm = 0.0
        self.delta_ema = 0.0


class Switch:
    is_host = False

    def __init__(self, sim, run, node_id, topo, policy, rng, cparams,
                 table_capacity=65536, partial_resume_ood=0,
                 flowlet_timeout_ps=20_000_000, flowcell_budget=65536):
        self.sim = sim
        self.run = run
        self.node_id = node_id
        self.topo = topo
        self.policy = policy
        self.rng = rng
        self.cparams = cparams
        self.table = {}
        self.table_capacity = table_capacity
        self.partial_resume_ood = partial_resume_ood
        self.flowlet_timeout_ps = flowlet_timeout_ps
        self.flowcell_budget = flowcell_budget
        self.flowcut_mode = policy == routing.FLOWCUT
        self.ports = {}                   # port id -> outgoing Channel
        self.rtt_floor = new_rtt_floor()
        self.flowlet_state = {}
        self.flowcell_state = {}
        self.group = topo.group_of.get(node_id, -1)
        self.max_occupancy = 0

    # -- helpers ----------------------------------------------------------

    def _depth(self, port):
        return self.ports[port].queued_bytes

    def _candidates(self, pkt, dst_sw):
        vg = pkt.valiant_group
        if vg is not None:
            return self.topo.group_next[(self.node_id, vg)]
        return self.topo.minimal_next[(self.node_id, dst_sw)]

    def _least_loaded(self, candidates):
        return routing.least_loaded(candidates, self._depth)

    def _nonminimal_group(self, dst_group):
        """Uniform random intermediate group, avoiding source and destination."""
        options = [g for g in range(self.topo.groups)
                   if g != self.group and g != dst_group]
        if not options:
            return None
        return options[self.rng.randrange(len(options))]

    def _ugal_choice(self, pkt, dst_sw):
        """Queue x hops comparison between the minimal path and a random detour.

        Returns the candidate set to use; tags the packet with the chosen
        intermediate group when the non-minimal side wins. Intra-group traffic
        always routes minimally: a detour would re-enter the source group and
        the resulting U-turn buffer dependency can deadlock credit loops
        (no virtual channels are modeled).
        """
        topo = self.topo
        minimal = topo.minimal_next[(self.node_id, dst_sw)]
        dst_group = topo.group_of[dst_sw]
        if dst_group == self.group:
            return minimal
        ig = self._nonminimal_group(dst_group)
        if ig is None:
            return minimal
        nonmin = topo.group_next.get((self.node_id, ig))
        if not nonmin:
            return minimal
        h_min = topo.sw_dist[(self.node_id, dst_sw)] + 1
        members = [s for s in topo.switches if topo.group_of[s] == ig]
        h_non = min(topo.sw_dist[(self.node_id, m)] + topo.sw_dist[(m, dst_sw)]
                    for m in members) + 1
        q_min = min(self._depth(p) for p in minimal)
        q_non = min(self._depth(p) for p in nonmin)
        if routing.ugal_prefers_nonminimal(q_min, h_min, q_non, h_non):
            pkt.valiant_group = ig
            return nonmin
        return minimal

    def _flowcut_select(self, pkt, dst_sw, ingress):
        """Port for a new flowcut: least-loaded uplink on trees, UGAL on Dragonfly."""
        if self.topo.kind == "dragonfly" and ingress:
            return self._least_loaded(self._ugal_choice(pkt, dst_sw))
        return self._least_loaded(self._candidates(pkt, dst_sw))

    def _baseline_select(self, pkt, ch, dst_sw):
        policy = self.policy
        key = pkt.key
        if policy == routing.UGAL:
            cands = (self._ugal_choice(pkt, dst_sw) if ch.src.is_host
                     else self._candidates(pkt, dst_sw))
            return self._least_loaded(cands)
        if policy == routing.VALIANT:
            if ch.src.is_host and self.topo.group_of[dst_sw] != self.group:
                ig = self._nonminimal_group(self.topo.group_of[dst_sw])
                if ig is not None:
                    pkt.valiant_group = ig
            return routing.spray_port(self.rng, self._candidates(pkt, dst_sw))
        cands = self._candidates(pkt, dst_sw)
        if policy == routing.SPRAYING:
            return routing.spray_port(self.rng, cands)
        if policy == routing.FLOWLET:
            return routing.flowlet_port(self.flowlet_state, key, self.sim.now_ps,
                                        self.flowlet_timeout_ps, cands, self._depth)
        if policy == routing.FLOWCELL:
            return routing.flowcell_port(self.flowcell_state, key, pkt.size,
                                         self.flowcell_budget, cands, self._depth)
        # ecmp and the NIC-driven variant (plain ECMP with the packet's salt)
        return routing.ecmp_port(key, pkt.salt, cands)

    def _create_entry(self, key, out_port, in_channel, ingress):
        entry = FlowcutEntry(key, out_port, in_channel, ingress)
        self.table[key] = entry
        occ = len(self.table)
        if occ > self.max_occupancy:
            self.max_occupancy = occ
        if ingress:
            self.run.metrics.note_flowcut_created(key)
        return entry

    def _trace(self, kind, key, psn, port):
        self.run.trace("%d %s %d %s %d %s"
                       % (self.sim.now_ps, key.hash_hex, psn,
                          self.topo.name[self.node_id], port, kind))

    # -- arrivals ----------------------------------------------------------

    def on_arrival(self, pkt, ch):
        kind = pkt.kind
        if kind == DATA:
            self._on_data(pkt, ch)
        elif kind == ACK:
            self._on_ack(pkt, ch)
        elif kind == NIC_ACK:
            self._on_nic_ack(pkt, ch)
        else:
            raise SimulationError("switch received a host control frame")

    def _on_data(self, pkt, ch):
        pkt.hop_count += 1
        if pkt.hop_count > MAX_HOP_COUNT:
            raise SimulationError(
                "hop count overflow for %r (4-bit wire field)" % (pkt.key,))
        pkt.via = ch
        ingress = ch.src.is_host
        topo = self.topo
        key = pkt.key
        dst_sw, host_port = self.run.attach[key.dst_addr]

        if pkt.valiant_group is not None and (
                self.group == pkt.valiant_group
                or self.group == topo.group_of.get(dst_sw, -2)):
            pkt.valiant_group = None

        if not self.flowcut_mode:
            out = host_port if dst_sw == self.node_id else \
                self._baseline_select(pkt, ch, dst_sw)
            if self.run.trace is not None:
                self._trace("fwd", key, pkt.psn, out)
            self.ports[out].enqueue(pkt, False, ch)
            return

        if ingress:
            pkt.stamp_ps = self.sim.now_ps
        entry = self.table.get(key)
        if dst_sw == self.node_id:
            out = host_port
            if entry is None:
                if len(self.table) >= self.table_capacity:
                    self.run.metrics.table_overflows += 1
                    if self.run.trace is not None:
                        self._trace("fwd", key, pkt.psn, out)
                    self.ports[out].enqueue(pkt, False, ch)
                    return
                entry = self._create_entry(key, out, ch, ingress)
            elif entry.drain_state == AWAIT_RESUME:
                entry.drain_state = ACTIVE
                entry.reset_congestion_state()
        else:
            if entry is None:
                if len(self.table) >= self.table_capacity:
                    # table full: this flow degrades to plain ECMP, no state
                    self.run.metrics.table_overflows += 1
                    out = routing.ecmp_port(key, pkt.salt,
                                            self._candidates(pkt, dst_sw))
                    if self.run.trace is not None:
                        self._trace("fwd", key, pkt.psn, out)
                    self.ports[out].enqueue(pkt, False, ch)
                    return
                out = self._flowcut_select(pkt, dst_sw, ingress)
                entry = self._create_entry(key, out, ch, ingress)
            elif entry.drain_state == AWAIT_RESUME:
                out = self._flowcut_select(pkt, dst_sw, entry.is_ingress)
                entry.out_port = out
                entry.drain_state = ACTIVE
                entry.reset_congestion_state()
            else:
                # includes packets arriving while draining: path stays pinned
                out = entry.out_port
        entry.inflight_bytes += pkt.size
        entry.inflight_pkts += 1
        if self.run.trace is not None:
            self._trace("fwd", key, pkt.psn, out)
        self.ports[out].enqueue(pkt, False, ch)

    def _on_ack(self, ack, ch):
        key = ack.key
        entry = self.table.get(key)
        if entry is None:
            # possible after timeout recovery or table overflow: count, then
            # push the ack toward the source so it leaves the fabric
            self.run.metrics.stale_acks += 1
            src_sw, _ = self.run.attach[key.src_addr]
            if src_sw == self.node_id:
                ch.consume_credit(ack.size)
            else:
                out = routing.ecmp_port(
                    key, 0, self.topo.minimal_next[(self.node_id, src_sw)])
                self.ports[out].enqueue(ack, True, ch)
            return
        entry.inflight_bytes -= ack.acked_bytes
        entry.inflight_pkts -= 1
        if entry.is_ingress:
            self._ingress_ack(entry, ack)
            ch.consume_credit(ack.size)
        else:
            rev = entry.in_channel.reverse
            if self.run.trace is not None:
                self._trace("ack_fwd", key, -1, rev.src_port)
            rev.enqueue(ack, True, ch)
            if entry.inflight_bytes <= 0:
                del self.table[key]

    def _ingress_ack(self, entry, ack):
        """RTT bookkeeping and the drain controller; runs at the ingress only."""
        cp = self.cparams
        measured = self.sim.now_ps - ack.echo_stamp_ps
        norm = normalized_rtt(measured, ack.acked_bytes, ack.echo_hops,
                              cp.t_ps_per_byte, self.rtt_floor)
        if entry.rtt_ema is None:
            entry.rtt_ema = norm
            entry.delta_ema = 0.0
        else:
            a = cp.alpha
            entry.delta_ema = a * (norm - entry.last_norm) + (1.0 - a) * entry.delta_ema
            entry.rtt_ema = a * norm + (1.0 - a) * entry.rtt_ema
        entry.last_norm = norm

        if self.run.trace is not None:
            self._trace("ack_consume", entry.key, -1, -1)

        if entry.inflight_bytes <= 0:
            if entry.drain_state == DRAINING:
                self._send_ctrl(XON, entry)
            del self.table[entry.key]
            return
        if entry.drain_state == ACTIVE:
            if (entry.rtt_ema > cp.rtt_ratio_threshold
                    or entry.delta_ema > cp.rtt_growth_threshold):
                self._send_ctrl(XOFF, entry)
                entry.drain_state = DRAINING
                self.run.metrics.drains_triggered += 1
        elif (entry.drain_state == DRAINING and self.partial_resume_ood > 0
              and entry.inflight_pkts <= self.partial_resume_ood):
            self._send_ctrl(XON, entry)
            entry.drain_state = AWAIT_RESUME

    def _send_ctrl(self, kind, entry):
        rev = entry.in_channel.reverse
        if self.run.trace is not None:
            self._trace("xoff" if kind == XOFF else "xon", entry.key, -1,
                        rev.src_port)
        rev.enqueue(CtrlPacket(kind, entry.key), True, None)

    def _on_nic_ack(self, ack, ch):
        """Host-level ack of the NIC variant: ECMP-routed to the flow source."""
        key = ack.key
        src_sw, host_port = self.run.attach[key.src_addr]
        if src_sw == self.node_id:
            out = host_port
        else:
            out = routing.ecmp_port(key, 0,
                                    self.topo.minimal_next[(self.node_id, src_sw)])
        self.ports[out].enqueue(ack, True, ch)

    # -- egress acknowledgment --------------------------------------------

    def on_tx_done(self, pkt, channel):
        """Ack emission: fires when a data frame finishes serializing toward
        the destination host (the moment the egress has forwarded it)."""
        if pkt.kind != DATA or not channel.dst.is_host or not self.flowcut_mode:
            return
        key = pkt.key
        entry = self.table.get(key)
        if entry is None:
            # overflow fallback left no state; retrace the packet's last hop
            # (when this switch was also the ingress there is nobody to tell)
            if pkt.via is not None and not pkt.via.src.is_host:
                ack = AckPacket(key, pkt.size, pkt.stamp_ps, pkt.hop_count)
                self.run.metrics.ack_wire_bytes += ack.size
                if self.run.trace is not None:
                    self._trace("ack_emit", key, pkt.psn, -1)
                pkt.via.reverse.enqueue(ack, True, None)
            return
        ack = AckPacket(key, pkt.size, pkt.stamp_ps, pkt.hop_count)
        self.run.metrics.ack_wire_bytes += ack.size
        if self.run.trace is not None:
            self._trace("ack_emit", key, pkt.psn, -1)
        entry.inflight_bytes -= pkt.size
        entry.inflight_pkts -= 1
        if entry.is_ingress:
            # single-switch path: this switch is ingress and egress at once
            self._ingress_ack(entry, ack)
        else:
            rev = entry.in_channel.reverse
            rev.enqueue(ack, True, None)
            if entry.inflight_bytes <= 0:
                del self.table[key]
