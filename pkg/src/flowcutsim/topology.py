"""Topology builders: 3-level fat trees, Dragonfly, star; failure injection.

Builders emit an immutable description (nodes, links with port ids, routing
hints). Routing hints are precomputed so that per-packet candidate lookup is
O(1): all-shortest-path next hops per (switch, destination switch), plus
toward-group next hops on Dragonfly for the non-minimal phase.
"""

import math
import random
from collections import deque
from dataclasses import dataclass, field, replace

HOST = "host"
TOR = "tor"
AGG = "aggregation"
CORE = "core"
DF_SWITCH = "switch"

DEFAULT_BW_BPS = 200 * 10 ** 9
DEFAULT_LAT_NS = 1000
DEFAULT_BUFFER_BYTES = 256 * 1024


class TopologyError(ValueError):
    """Non-realizable topology parameters."""


@dataclass(frozen=True)
class LinkSpec:
    """A bidirectional link; `a_port`/`b_port` are port ids at each endpoint."""
    a: int
    b: int
    a_port: int
    b_port: int
    bandwidth_bps: int
    latency_ns: float


@dataclass(frozen=True)
class FailurePlan:
    seed: int = 0
    fraction: float = 0.0
    degrade_factor: int = 10

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise TopologyError("failure fraction must be in [0, 1]")
        if self.degrade_factor < 1:
            raise TopologyError("degrade_factor must be >= 1")


@dataclass
class Topology:
    kind: str
    hosts: list
    switches: list
    role: dict                      # node id -> role string
    name: dict                      # node id -> printable name
    links: list                     # list[LinkSpec]
    host_attach: dict               # host -> (switch, switch port toward host)
    minimal_next: dict              # (switch, dst switch) -> tuple of ports
    sw_dist: dict                   # (switch, switch) -> hop distance
    group_of: dict = field(default_factory=dict)    # Dragonfly: switch -> group
    group_next: dict = field(default_factory=dict)  # (switch, group) -> ports
    group_dist: dict = field(default_factory=dict)  # (switch, group) -> distance
    groups: int = 0
    params: dict = field(default_factory=dict)

    def fabric_links(self):
        """Switch-to-switch links (hosts are excluded from failure injection)."""
        hostset = set(self.hosts)
        return [l for l in self.links if l.a not in hostset and l.b not in hostset]

    def neighbors(self, node):
        out = []
        for l in self.links:
            if l.a == node:
                out.append((l.b, l.a_port))
            elif l.b == node:
                out.append((l.a, l.b_port))
        return out


class _PortAllocator:
    def __init__(self):
        self.counts = {}

    def take(self, node):
        p = self.counts.get(node, 0)
        self.counts[node] = p + 1
        return p


def _link(ports, links, a, b, bw, lat):
    links.append(LinkSpec(a, b, ports.take(a), ports.take(b), bw, lat))


def _switch_adjacency(topo_links, switches):
    swset = set(switches)
    adj = {s: [] for s in switches}
    for l in topo_links:
        if l.a in swset and l.b in swset:
            adj[l.a].append((l.b, l.a_port))
            adj[l.b].append((l.a, l.b_port))
    return adj


def _all_shortest_hints(switches, adj):
    """BFS from every destination; next hops = neighbors one step closer."""
    minimal_next = {}
    sw_dist = {}
    for dst in switches:
        dist = {dst: 0}
        frontier = deque([dst])
        while frontier:
            u = frontier.popleft()
            for v, _ in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    frontier.append(v)
        for s in switches:
            if s not in dist:
                raise TopologyError("switch fabric is not connected")
            sw_dist[(s, dst)] = dist[s]
            if s == dst:
                continue
            ports = tuple(sorted(p for v, p in adj[s] if dist.get(v) == dist[s] - 1))
            minimal_next[(s, dst)] = ports
    return minimal_next, sw_dist


def _toward_group_hints(switches, adj, group_of, groups):
    group_next = {}
    group_dist = {}
    for g in range(groups):
        targets = [s for s in switches if group_of[s] == g]
        dist = {t: 0 for t in targets}
        frontier = deque(targets)
        while frontier:
            u = frontier.popleft()
            for v, _ in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    frontier.append(v)
        for s in switches:
            group_dist[(s, g)] = dist[s]
            if dist[s] == 0:
                continue
            ports = tuple(sorted(p for v, p in adj[s] if dist.get(v) == dist[s] - 1))
            group_next[(s, g)] = ports
    return group_next, group_dist


def _finish(topo):
    adj = _switch_adjacency(topo.links, topo.switches)
    topo.minimal_next, topo.sw_dist = _all_shortest_hints(topo.switches, adj)
    if topo.kind == "dragonfly":
        topo.group_next, topo.group_dist = _toward_group_hints(
            topo.switches, adj, topo.group_of, topo.groups)
    return topo


def build_fat_tree(pods, hosts_per_tor, taper=1,
                   bandwidth_bps=DEFAULT_BW_BPS, latency_ns=DEFAULT_LAT_NS):
    """Classic 3-level fat tree keyed by pod count.

    At 1:1, tors_per_pod = aggs_per_pod = pods/2 and cores = (pods/2)^2
    (16 pods gives the 128 ToR / 128 aggregation / 64 core arrangement).
    A 2:1 taper halves each ToR's uplink count, which halves the aggregation
    layer (and the core rows hanging off it).
    """
    if pods < 2 or pods % 2:
        raise TopologyError("pods must be an even count >= 2, got %r" % (pods,))
    if hosts_per_tor < 1:
        raise TopologyError("hosts_per_tor must be >= 1")
    if taper not in (1, 2):
        raise TopologyError("taper must be 1 (1:1) or 2 (2:1)")
    half = pods // 2
    if half % taper:
        raise TopologyError(
            "taper 2:1 needs an even number of aggregation switches per pod "
            "(pods=%d gives %d)" % (pods, half))
    aggs_per_pod = half // taper

    n_tor = pods * half
    n_agg = pods * aggs_per_pod
    n_core = aggs_per_pod * half
    n_hosts = n_tor * hosts_per_tor

    hosts = list(range(n_hosts))
    tor0 = n_hosts
    agg0 = tor0 + n_tor
    core0 = agg0 + n_agg
    switches = list(range(tor0, core0 + n_core))

    role = {h: HOST for h in hosts}
    name = {h: "h%d" % h for h in hosts}
    for i in range(n_tor):
        role[tor0 + i] = TOR
        name[tor0 + i] = "t%d" % i
    for i in range(n_agg):
        role[agg0 + i] = AGG
        name[agg0 + i] = "a%d" % i
    for i in range(n_core):
        role[core0 + i] = CORE
        name[core0 + i] = "c%d" % i

    ports = _PortAllocator()
    links = []
    host_attach = {}

    for pod in range(pods):
        for t in range(half):
            tor = tor0 + pod * half + t
            for h in range(hosts_per_tor):
                host = (pod * half + t) * hosts_per_tor + h
                _link(ports, links, tor, host, bandwidth_bps, latency_ns)
                host_attach[host] = (tor, links[-1].a_port)
            for u in range(aggs_per_pod):
                agg = agg0 + pod * aggs_per_pod + u
                _link(ports, links, tor, agg, bandwidth_bps, latency_ns)
        for a in range(aggs_per_pod):
            agg = agg0 + pod * aggs_per_pod + a
            for c in range(half):
                core = core0 + a * half + c
                _link(ports, links, agg, core, bandwidth_bps, latency_ns)

    topo = Topology(kind="fat_tree", hosts=hosts, switches=switches, role=role,
                    name=name, links=links, host_attach=host_attach,
                    minimal_next={}, sw_dist={},
                    params={"pods": pods, "hosts_per_tor": hosts_per_tor,
                            "taper": taper})
    return _finish(topo)


def build_dragonfly(groups, switches_per_group, hosts_per_switch,
                    global_links_per_group_pair=1, radix=None,
                    bandwidth_bps=DEFAULT_BW_BPS, latency_ns=DEFAULT_LAT_NS):
    """Dragonfly: full mesh inside each group, configured global links per pair.

    Global link endpoints are spread round-robin over a group's switches; the
    arrangement is deterministic.
    """
    if groups < 2:
        raise TopologyError("need at least 2 groups")
    if switches_per_group < 1 or hosts_per_switch < 1:
        raise TopologyError("switches_per_group and hosts_per_switch must be >= 1")
    if global_links_per_group_pair < 1:
        raise TopologyError("global_links_per_group_pair must be >= 1")

    a = switches_per_group
    glpp = global_links_per_group_pair
    global_ports = (groups - 1) * glpp
    per_switch_global = -(-global_ports // a)  # ceil
    needed = hosts_per_switch + (a - 1) + per_switch_global
    if radix is not None and needed > radix:
        raise TopologyError(
            "switch radix %d too small: needs %d ports "
            "(%d host + %d local + %d global)"
            % (radix, needed, hosts_per_switch, a - 1, per_switch_global))

    n_hosts = groups * a * hosts_per_switch
    hosts = list(range(n_hosts))
    sw0 = n_hosts
    switches = [sw0 + i for i in range(groups * a)]

    role = {h: HOST for h in hosts}
    name = {h: "h%d" % h for h in hosts}
    group_of = {}
    for g in range(groups):
        for s in range(a):
            sw = sw0 + g * a + s
            role[sw] = DF_SWITCH
            name[sw] = "g%ds%d" % (g, s)
            group_of[sw] = g

    ports = _PortAllocator()
    links = []
    host_attach = {}

    for g in range(groups):
        for s in range(a):
            sw = sw0 + g * a + s
            for h in range(hosts_per_switch):
                host = (g * a + s) * hosts_per_switch + h
                _link(ports, links, sw, host, bandwidth_bps, latency_ns)
                host_attach[host] = (sw, links[-1].a_port)
        for s in range(a):
            for t in range(s + 1, a):
                _link(ports, links, sw0 + g * a + s, sw0 + g * a + t,
                      bandwidth_bps, latency_ns)

    # Round-robin global endpoint assignment: group g's endpoints are ranked by
    # (peer group, link index) and land on switch rank % a.
    slot = {g: 0 for g in range(groups)}

    def endpoint(g, peer, k):
        r = slot[g]
        slot[g] += 1
        return sw0 + g * a + (r % a)

    for g in range(groups):
        for peer in range(g + 1, groups):
            for k in range(glpp):
                _link(ports, links, endpoint(g, peer, k), endpoint(peer, g, k),
                      bandwidth_bps, latency_ns)

    topo = Topology(kind="dragonfly", hosts=hosts, switches=switches, role=role,
                    name=name, links=links, host_attach=host_attach,
                    minimal_next={}, sw_dist={}, group_of=group_of, groups=groups,
                    params={"groups": groups, "switches_per_group": a,
                            "hosts_per_switch": hosts_per_switch,
                            "global_links_per_group_pair": glpp})
    return _finish(topo)


def build_star(hosts, bandwidth_bps=DEFAULT_BW_BPS, latency_ns=DEFAULT_LAT_NS):
    """All hosts on one switch; single-path, used for smoke and edge cases."""
    if hosts < 1:
        raise TopologyError("need at least 1 host")
    hostlist = list(range(hosts))
    sw = hosts
    role = {h: HOST for h in hostlist}
    role[sw] = TOR
    name = {h: "h%d" % h for h in hostlist}
    name[sw] = "t0"
    ports = _PortAllocator()
    links = []
    host_attach = {}
    for h in hostlist:
        _link(ports, links, sw, h, bandwidth_bps, latency_ns)
        host_attach[h] = (sw, links[-1].a_port)
    topo = Topology(kind="star", hosts=hostlist, switches=[sw], role=role,
                    name=name, links=links, host_attach=host_attach,
                    minimal_next={}, sw_dist={}, params={"hosts": hosts})
    return _finish(topo)


def inject_failures(topo, plan):
    """Degrade a seeded uniform selection of fabric links by plan.degrade_factor.

    fraction > 0 degrades ceil(fraction * fabric_link_count) links so that a
    1% plan still hits at least one link at desk scale. Links keep operating;
    connectivity is unchanged.
    """
    if plan.fraction == 0.0:
        return topo
    fabric = topo.fabric_links()
    count = min(len(fabric), math.ceil(plan.fraction * len(fabric)))
    rng = random.Random(plan.seed)
    chosen = set(id(l) for l in rng.sample(fabric, count))
    new_links = []
    for l in topo.links:
        if id(l) in chosen:
            new_links.append(replace(l, bandwidth_bps=max(1, l.bandwidth_bps // plan.degrade_factor)))
        else:
            new_links.append(l)
    return replace_topology_links(topo, new_links)


def replace_topology_links(topo, new_links):
    out = Topology(kind=topo.kind, hosts=topo.hosts, switches=topo.switches,
                   role=topo.role, name=topo.name, links=new_links,
                   host_attach=topo.host_attach, minimal_next=topo.minimal_next,
                   sw_dist=topo.sw_dist, group_of=topo.group_of,
                   group_next=topo.group_next, group_dist=topo.group_dist,
                   groups=topo.groups, params=topo.params)
    return out


def export_edge_list(topo):
    """One line per link: endpoint names, bandwidth (b/s), latency (ns)."""
    lines = []
    for l in topo.links:
        lines.append("%s %s %d %g" % (topo.name[l.a], topo.name[l.b],
                                      l.bandwidth_bps, l.latency_ns))
    return "\n".join(lines) + "\n"
