"""Wire-level units: flow keys, data packets, acks, and pause/resume signals."""

import struct
import zlib

# Wire-format constants. The 5-tuple key is 13 bytes; acks and pause/resume
# frames are 20 bytes on the wire. Hop counters are 4-bit fields (0..15).
FLOW_KEY_BYTES = 13
ACK_WIRE_BYTES = 20
CTRL_WIRE_BYTES = 20
MAX_HOP_COUNT = 15

PROTO_UDP = 17
DEFAULT_DST_PORT = 4791  # RoCEv2

# Packet kinds.
DATA = 0
ACK = 1
XOFF = 2
XON = 3
NIC_ACK = 4

_KEY_STRUCT = struct.Struct(">IIHHB")


class FlowKey:
    """Canonical 13-byte 5-tuple. Injective: equal keys iff equal tuples."""

    __slots__ = ("src_addr", "dst_addr", "src_port", "dst_port", "protocol",
                 "wire", "_hash")

    def __init__(self, src_addr, dst_addr, src_port, dst_port, protocol=PROTO_UDP):
        self.src_addr = src_addr
        self.dst_addr = dst_addr
        self.src_port = src_port
        self.dst_port = dst_port
        self.protocol = protocol
        self.wire = _KEY_STRUCT.pack(src_addr, dst_addr, src_port, dst_port, protocol)
        self._hash = hash(self.wire)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self.wire == other.wire

    def __repr__(self):
        return ("FlowKey(%d->%d sport=%d dport=%d proto=%d)"
                % (self.src_addr, self.dst_addr, self.src_port, self.dst_port, self.protocol))

    @property
    def hash_hex(self):
        """Stable 8-hex-digit digest used in traces and flows.csv."""
        return "%08x" % zlib.crc32(self.wire)


class DataPacket:
    """A data frame. stamp_ps/hop_count implement the custom timing header."""

    __slots__ = ("key", "psn", "size", "stamp_ps", "hop_count", "is_last",
                 "salt", "valiant_group", "via")
    kind = DATA

    def __init__(self, key, psn, size, is_last=False, salt=0):
        self.key = key
        self.psn = psn
        self.size = size
        self.stamp_ps = 0
        self.hop_count = 0
        self.is_last = is_last
        self.salt = salt          # extra ECMP hash input, rewritten by the NIC variant
        self.valiant_group = None # intermediate group while in the non-minimal phase
        self.via = None           # channel this packet last arrived on


class AckPacket:
    """Per-packet acknowledgment, echoing the data packet's timing header."""

    __slots__ = ("key", "acked_bytes", "echo_stamp_ps", "echo_hops", "size", "via")
    kind = ACK

    def __init__(self, key, acked_bytes, echo_stamp_ps, echo_hops):
        self.key = key
        self.acked_bytes = acked_bytes
        self.echo_stamp_ps = echo_stamp_ps
        self.echo_hops = echo_hops
        self.size = ACK_WIRE_BYTES
        self.via = None


class NicAckPacket(AckPacket):
    """Host-to-host ack used by the NIC-driven variant; ECMP-routed like data."""

    __slots__ = ()
    kind = NIC_ACK


class CtrlPacket:
    """Per-flow pause (XOFF) or resume (XON) signal, ack priority, 20 bytes."""

    __slots__ = ("kind", "key", "size", "via")

    def __init__(self, kind, key):
        self.kind = kind
        self.key = key
        self.size = CTRL_WIRE_BYTES
        self.via = None
