"""Traffic sources and sinks: injection, pause/resume obedience, loss-timeout
recovery, receiver-side reorder tracking, and the NIC-driven variant.

Hosts transmit at line rate whenever unblocked; congestion control is out of
scope (credits and pauses are the only brakes). The NIC variant keeps the
whole flowcut state machine at the source host: it timestamps packets, digests
host-level acks, pauses itself to drain, then rewrites its ECMP hash salt.
"""

from .engine import SimulationError
from .packets import (DATA, XOFF, XON, NIC_ACK, ACK,
                      DataPacket, NicAckPacket)
from .switchnode import normalized_rtt, new_rtt_floor


class TxFlow:
    __slots__ = ("key", "total", "remaining", "next_psn", "paused",
                 "pause_start_ps", "paused_intervals", "drains", "reroutes",
                 "timeout_token", "salt", "sent_bytes", "acked_bytes",
                 "nic_draining", "rtt_ema", "last_norm", "delta_ema")

    def __init__(self, key, total):
        self.key = key
        self.total = total
        self.remaining = total
        self.next_psn = 0
        self.paused = False
        self.pause_start_ps = 0
        self.paused_intervals = []
        self.drains = 0
        self.reroutes = 0
        self.timeout_token = None
        self.salt = 0
        self.sent_bytes = 0
        self.acked_bytes = 0
        self.nic_draining = False
        self.rtt_ema = None
        self.last_norm = 0.0
        self.delta_ema = 0.0


class RecvFlow:
    __slots__ = ("key", "total", "got", "expected", "ooo", "max_ood")

    def __init__(self, key, total):
        self.key = key
        self.total = total
        self.got = 0
        self.expected = 0
        self.ooo = 0
        self.max_ood = 0


class Host:
    is_host = True

    def __init__(self, sim, run, host_id, mtu, rng, nic_mode=False,
                 cparams=None, resume_timeout_ps=0, control_loss_probability=0.0):
        self.sim = sim
        self.run = run
        self.host_id = host_id
        self.mtu = mtu
        self.rng = rng
        self.nic_mode = nic_mode
        self.cparams = cparams
        self.resume_timeout_ps = resume_timeout_ps
        self.control_loss_probability = control_loss_probability
        self.uplink = None          # wired by the runner
        self.flows = {}
        self.order = []
        self.rr_idx = 0
        self.recv = {}
        self.rtt_floor = new_rtt_floor()
        self._data_outstanding = False

    # -- sending ------------------------------------------------------------

    def start_flow(self, key, size):
        if key in self.flows:
            raise SimulationError("flow key %r already live on host %d"
                                  % (key, self.host_id))
        tx = TxFlow(key, size)
        self.flows[key] = tx
        self.order.append(key)
        self.pump()
        return tx

    def pump(self):
        """Inject the next frame of the next unpaused flow, one frame ahead."""
        if self._data_outstanding:
            return
        order = self.order
        n = len(order)
        for i in range(n):
            tx = self.flows[order[(self.rr_idx + i) % n]]
            if tx.remaining > 0 and not tx.paused:
                self.rr_idx = (self.rr_idx + i + 1) % n
                self._inject(tx)
                return

    def _inject(self, tx):
        size = tx.remaining if tx.remaining < self.mtu else self.mtu
        pkt = DataPacket(tx.key, tx.next_psn, size,
                         is_last=(tx.remaining == size), salt=tx.salt)
        tx.next_psn += 1
        tx.remaining -= size
        if self.nic_mode:
            pkt.stamp_ps = self.sim.now_ps
            tx.sent_bytes += size
        self.run.metrics.injected_bytes += size
        if self.run.trace is not None:
            self.run.trace("%d %s %d h%d -1 inject"
                           % (self.sim.now_ps, tx.key.hash_hex, pkt.psn,
                              self.host_id))
        self._data_outstanding = True
        self.uplink.enqueue(pkt, False, None)

    def on_tx_done(self, pkt, channel):
        if pkt.kind == DATA:
            self._data_outstanding = False
        self.pump()

    # -- pause / resume ------------------------------------------------------

    def pause_flow(self, key):
        tx = self.flows.get(key)
        if tx is None or tx.paused:
            return  # idempotent
        tx.paused = True
        tx.pause_start_ps = self.sim.now_ps
        tx.drains += 1
        if self.run.trace is not None:
            self.run.trace("%d %s -1 h%d -1 pause"
                           % (self.sim.now_ps, key.hash_hex, self.host_id))
        if self.resume_timeout_ps > 0:
            token = object()
            tx.timeout_token = token
            self.sim.schedule(self.sim.now_ps + self.resume_timeout_ps,
                              self._timeout_fire, (key, token))

    def resume_flow(self, key, by_timeout=False):
        tx = self.flows.get(key)
        if tx is None or not tx.paused:
            self.run.metrics.stale_controls += 1
            return
        tx.paused = False
        tx.paused_intervals.append((tx.pause_start_ps, self.sim.now_ps))
        tx.timeout_token = None
        if by_timeout:
            self.run.metrics.timeout_resumes += 1
            # lost resume: the NIC keeps the old salt, switches the old path
            tx.nic_draining = False
        if self.run.trace is not None:
            self.run.trace("%d %s -1 h%d -1 resume"
                           % (self.sim.now_ps, key.hash_hex, self.host_id))
        self.pump()

    def _timeout_fire(self, arg):
        key, token = arg
        tx = self.flows.get(key)
        if tx is not None and tx.paused and tx.timeout_token is token:
            self.resume_flow(key, by_timeout=True)

    # -- receiving ------------------------------------------------------------

    def on_arrival(self, pkt, ch):
        kind = pkt.kind
        if kind == DATA:
            self._receive_data(pkt, ch)
        elif kind == XON:
            ch.consume_credit(pkt.size)
            if (self.control_loss_probability > 0.0
                    and self.rng.random() < self.control_loss_probability):
                self.run.metrics.lost_controls += 1
                return
            self.resume_flow(pkt.key)
        elif kind == XOFF:
            ch.consume_credit(pkt.size)
            self.pause_flow(pkt.key)
        elif kind == NIC_ACK:
            ch.consume_credit(pkt.size)
            if (self.control_loss_probability > 0.0
                    and self.rng.random() < self.control_loss_probability):
                self.run.metrics.lost_controls += 1
                return
            self._nic_ack(pkt)
        elif kind == ACK:
            raise SimulationError("switch-level ack delivered to a host")

    def _receive_data(self, pkt, ch):
        ch.consume_credit(pkt.size)
        key = pkt.key
        rs = self.recv.get(key)
        if rs is None:
            raise SimulationError("data for unregistered flow %r" % (key,))
        if pkt.psn == rs.expected:
            rs.expected += 1
        else:
            rs.ooo += 1
            if pkt.psn > rs.expected:
                gap = pkt.psn - rs.expected
                if gap > rs.max_ood:
                    rs.max_ood = gap
                rs.expected = pkt.psn + 1
        rs.got += pkt.size
        self.run.metrics.deliver(pkt.size, self.sim.now_ps)
        if self.run.trace is not None:
            self.run.trace("%d %s %d h%d -1 deliver"
                           % (self.sim.now_ps, key.hash_hex, pkt.psn,
                              self.host_id))
        if self.nic_mode:
            ack = NicAckPacket(key, pkt.size, pkt.stamp_ps, pkt.hop_count)
            self.run.metrics.ack_wire_bytes += ack.size
            self.uplink.enqueue(ack, True, None)
        if rs.got >= rs.total:
            self.run.flow_completed(key)

    # -- NIC-driven flowcut ----------------------------------------------------

    def _nic_ack(self, ack):
        tx = self.flows.get(ack.key)
        if tx is None:
            self.run.metrics.stale_acks += 1
            return
        tx.acked_bytes += ack.acked_bytes
        cp = self.cparams
        measured = self.sim.now_ps - ack.echo_stamp_ps
        norm = normalized_rtt(measured, ack.acked_bytes, ack.echo_hops,
                              cp.t_ps_per_byte, self.rtt_floor)
        if tx.rtt_ema is None:
            tx.rtt_ema = norm
            tx.delta_ema = 0.0
        else:
            a = cp.alpha
            tx.delta_ema = a * (norm - tx.last_norm) + (1.0 - a) * tx.delta_ema
            tx.rtt_ema = a * norm + (1.0 - a) * tx.rtt_ema
        tx.last_norm = norm
        inflight = tx.sent_bytes - tx.acked_bytes
        if tx.nic_draining:
            if inflight <= 0:
                tx.nic_draining = False
                tx.salt = self.rng.getrandbits(32)
                tx.reroutes += 1
                tx.rtt_ema = None
                tx.last_norm = 0.0
                tx.delta_ema = 0.0
                self.resume_flow(tx.key)
        elif (tx.remaining > 0 and inflight > 0
              and (tx.rtt_ema > cp.rtt_ratio_threshold
                   or tx.delta_ema > cp.rtt_growth_threshold)):
            tx.nic_draining = True
            self.run.metrics.drains_triggered += 1
            self.pause_flow(tx.key)
