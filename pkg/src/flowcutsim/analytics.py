"""Closed-form resource models: active-flow count, switch memory occupancy,
ack bandwidth overhead.

Units are explicit at the boundary: bandwidth is bits/second, latency is
seconds, MTU and memory are bytes. Inside the model bandwidth is converted
to bytes/second before mixing with the MTU.
"""

from dataclasses import dataclass

ACK_WIRE_BYTES = 20
# Custom data-packet header: 2-byte timestamp + 4-bit hop count padded to a
# byte; it slightly reduces the advertised MTU.
DATA_HEADER_BYTES = 3

PER_FLOW_STATE_BYTES = {
    "flowcell": 2,
    "flowlet": 5,
    "flowcut": 11,
}


@dataclass(frozen=True)
class ResourceModelInputs:
    hosts: int                 # H
    flows_per_host: float      # f
    bandwidth_bps: float       # B, bits/second
    latency_s: float           # l, one-way packet latency
    mtu_bytes: float           # M
    per_flow_bytes: int = PER_FLOW_STATE_BYTES["flowcut"]

    def __post_init__(self):
        if (self.hosts <= 0 or self.flows_per_host <= 0
                or self.bandwidth_bps <= 0 or self.latency_s < 0
                or self.mtu_bytes <= 0 or self.per_flow_bytes <= 0):
            raise ValueError("resource model inputs must be positive")


def active_flows(inputs):
    """Worst-case active flows network-wide.

    Each flow's in-flight data is its share of the bandwidth-delay product;
    once flows average less than one in-flight packet, adding flows no longer
    adds active flows.
    """
    bytes_per_s = inputs.bandwidth_bps / 8.0
    per_flow_inflight_pkts = (bytes_per_s * inputs.latency_s
                              / (inputs.flows_per_host * inputs.mtu_bytes))
    if per_flow_inflight_pkts >= 1.0:
        return inputs.hosts * inputs.flows_per_host
    return inputs.hosts * bytes_per_s * inputs.latency_s / inputs.mtu_bytes


def memory_occupancy(inputs):
    """Bytes of flow state, worst case: one switch sees every active flow."""
    return active_flows(inputs) * inputs.per_flow_bytes


def ack_overhead(mtu_bytes):
    """Ack bytes per data packet as a fraction of the packet size."""
    if mtu_bytes <= 0:
        raise ValueError("mtu must be positive")
    return ACK_WIRE_BYTES / mtu_bytes


def effective_payload(mtu_bytes):
    """Advertised MTU after the timing header is carved out."""
    if mtu_bytes <= DATA_HEADER_BYTES:
        raise ValueError("mtu too small for the timing header")
    return mtu_bytes - DATA_HEADER_BYTES


def model_table(subcommand, axes, fixed):
    """Sweep table for the CLI: one row per point of the single swept axis.

    `axes` maps one input name to a value list; `fixed` holds the rest.
    Returns (header_fields, rows).
    """
    if len(axes) != 1:
        raise ValueError("model table wants exactly one swept axis")
    (axis_name, values), = axes.items()
    rows = []
    if subcommand == "ack-overhead":
        for v in values:
            rows.append((v, ack_overhead(v if axis_name == "mtu_bytes"
                                         else fixed["mtu_bytes"])))
        return (axis_name, "ack_overhead"), rows
    for v in values:
        params = dict(fixed)
        params[axis_name] = v
        inputs = ResourceModelInputs(
            hosts=int(params["hosts"]),
            flows_per_host=params["flows_per_host"],
            bandwidth_bps=params["bandwidth_bps"],
            latency_s=params["latency_s"],
            mtu_bytes=params["mtu_bytes"],
            per_flow_bytes=int(params.get("per_flow_bytes",
                                          PER_FLOW_STATE_BYTES["flowcut"])))
        if subcommand == "active-flows":
            rows.append((v, active_flows(inputs)))
        elif subcommand == "memory":
            rows.append((v, memory_occupancy(inputs)))
        else:
            raise ValueError("unknown model subcommand %r" % (subcommand,))
    return (axis_name, subcommand.replace("-", "_")), rows
