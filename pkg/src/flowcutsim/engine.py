"""Deterministic discrete-event core: clock, event queue, and link channels.

Time is integer picoseconds internally so fractional-nanosecond serialization
delays (81.92 ns for 2048 B at 200 Gb/s) stay exact and tiebreaks are
reproducible; every external surface speaks nanoseconds.
"""

import heapq
from collections import deque

PS_PER_NS = 1000
PS_PER_SEC = 10 ** 12


def ns_to_ps(ns):
    return int(round(ns * PS_PER_NS))


def ps_to_ns(ps):
    return ps / PS_PER_NS


class SimulationError(RuntimeError):
    """Fatal logic error in a run: scheduling in the past, hop overflow, etc."""


class DeadlockError(SimulationError):
    """Event queue drained with unfinished flows."""

    def __init__(self, message, stuck_flows=()):
        super().__init__(message)
        self.stuck_flows = list(stuck_flows)


class Simulator:
    """Single-threaded event loop. Equal-time events dispatch in schedule order."""

    __slots__ = ("now_ps", "_heap", "_seq", "after_event")

    def __init__(self):
        self.now_ps = 0
        self._heap = []
        self._seq = 0
        self.after_event = None  # optional invariant hook, called after each event

    def schedule(self, time_ps, handler, arg=None):
        if time_ps < self.now_ps:
            raise SimulationError(
                "event scheduled in the past: t=%d ps < now=%d ps" % (time_ps, self.now_ps))
        heapq.heappush(self._heap, (time_ps, self._seq, handler, arg))
        self._seq += 1

    def run(self):
        """Dispatch until the queue is empty; returns the clock in picoseconds."""
        heap = self._heap
        pop = heapq.heappop
        while heap:
            t, _, fn, arg = pop(heap)
            self.now_ps = t
            fn(arg)
            if self.after_event is not None:
                self.after_event()
        return self.now_ps

    def pending(self):
        return len(self._heap)


class Channel:
    """One direction of a link: upstream queues, serializer, downstream credits.

    Lossless rule: a frame starts serialization only when the downstream
    buffer has credits covering its size. Credits are taken at transmission
    start and restored when the frame is drained from the downstream node's
    queue (or consumed by a host). Control frames (acks, XOFF/XON) use a
    strict-priority queue ahead of data.
    """

    __slots__ = ("cid", "src", "dst", "src_port", "dst_port", "bw_bps", "lat_ps",
                 "buffer_bytes", "credits", "owed_bytes", "busy", "ctrl_q", "data_q",
                 "queued_bytes", "in_service", "propagating", "wire_bytes",
                 "sim", "reverse")

    def __init__(self, sim, cid, src, dst, src_port, dst_port, bw_bps, lat_ps, buffer_bytes):
        if bw_bps <= 0:
            raise SimulationError("channel %s: bandwidth must be > 0" % (cid,))
        self.sim = sim
        self.cid = cid
        self.src = src
        self.dst = dst
        self.src_port = src_port
        self.dst_port = dst_port
        self.bw_bps = bw_bps
        self.lat_ps = lat_ps
        self.buffer_bytes = buffer_bytes
        self.credits = buffer_bytes
        self.owed_bytes = 0       # bytes sitting downstream still owing us credit
        self.busy = False
        self.ctrl_q = deque()
        self.data_q = deque()
        self.queued_bytes = 0
        self.in_service = None
        self.propagating = set()
        self.wire_bytes = 0
        self.reverse = None       # opposite direction of the same link

    def ser_ps(self, size):
        """Serialization delay for `size` bytes, exact integer picoseconds."""
        return (size * 8 * PS_PER_SEC + self.bw_bps - 1) // self.bw_bps

    def enqueue(self, pkt, ctrl, owed):
        q = self.ctrl_q if ctrl else self.data_q
        q.append((pkt, owed))
        self.queued_bytes += pkt.size
        if owed is not None:
            owed.owed_bytes += pkt.size
        self.try_start()

    def try_start(self):
        if self.busy:
            return
        if self.ctrl_q:
            q = self.ctrl_q
        elif self.data_q:
            q = self.data_q
        else:
            return
        pkt, owed = q[0]
        if self.credits < pkt.size:
            return  # backpressure: held upstream, never dropped
        q.popleft()
        self.queued_bytes -= pkt.size
        self.credits -= pkt.size
        self.wire_bytes += pkt.size
        if owed is not None:
            owed.restore_credit(pkt.size)
        self.busy = True
        self.in_service = pkt
        done = self.sim.now_ps + self.ser_ps(pkt.size)
        self.sim.schedule(done, self._tx_done, pkt)
        self.sim.schedule(done + self.lat_ps, self._arrive, pkt)

    def restore_credit(self, size):
        self.owed_bytes -= size
        self.credits += size
        if not self.busy:
            self.try_start()

    def consume_credit(self, size):
        """Credit return for frames consumed at the downstream node itself."""
        self.credits += size
        if not self.busy:
            self.try_start()

    def _tx_done(self, pkt):
        self.busy = False
        self.in_service = None
        self.propagating.add(pkt)
        self.src.on_tx_done(pkt, self)
        self.try_start()

    def _arrive(self, pkt):
        self.propagating.discard(pkt)
        self.wire_bytes -= pkt.size
        self.dst.on_arrival(pkt, self)

    # census helpers (invariant checking / conservation audits)

    def queued_packets(self):
        for pkt, _ in self.ctrl_q:
            yield pkt
        for pkt, _ in self.data_q:
            yield pkt

    def wire_packets(self):
        if self.in_service is not None:
            yield self.in_service
        for pkt in self.propagating:
            yield pkt
