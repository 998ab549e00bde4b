"""Topology builders, routing hints, and failure injection."""

from collections import deque

import pytest

from flowcutsim import topology as tp


def bfs_dist(links, start, nodes):
    """Independent BFS oracle over the raw edge list."""
    adj = {n: [] for n in nodes}
    for l in links:
        if l.a in adj and l.b in adj:
            adj[l.a].append(l.b)
            adj[l.b].append(l.a)
    dist = {start: 0}
    q = deque([start])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def test_paper_scale_fat_tree_switch_counts():
    topo = tp.build_fat_tree(pods=16, hosts_per_tor=8)
    roles = list(topo.role.values())
    assert len(topo.hosts) == 1024
    assert roles.count(tp.TOR) == 128
    assert roles.count(tp.AGG) == 128
    assert roles.count(tp.CORE) == 64


def test_desk_fat_tree_every_host_pair_reachable():
    topo = tp.build_fat_tree(pods=4, hosts_per_tor=16)
    assert len(topo.hosts) == 128
    dist = bfs_dist(topo.links, 0, set(topo.hosts) | set(topo.switches))
    assert all(h in dist for h in topo.hosts)


def test_taper_halves_tor_uplinks():
    full = tp.build_fat_tree(pods=4, hosts_per_tor=4, taper=1)
    tapered = tp.build_fat_tree(pods=4, hosts_per_tor=4, taper=2)

    def uplinks(topo):
        tor = next(s for s in topo.switches if topo.role[s] == tp.TOR)
        return sum(1 for l in topo.fabric_links() if tor in (l.a, l.b))

    assert uplinks(tapered) * 2 == uplinks(full)


def test_fat_tree_rejects_bad_parameters():
    with pytest.raises(tp.TopologyError):
        tp.build_fat_tree(pods=3, hosts_per_tor=4)
    with pytest.raises(tp.TopologyError):
        tp.build_fat_tree(pods=4, hosts_per_tor=0)
    with pytest.raises(tp.TopologyError):
        tp.build_fat_tree(pods=2, hosts_per_tor=4, taper=2)


def test_paper_scale_dragonfly():
    # four groups of 16 switches x 16 hosts; every group pair joined by 16 links
    topo = tp.build_dragonfly(4, 16, 16, global_links_per_group_pair=16,
                              radix=64)
    assert len(topo.hosts) == 1024
    pair_links = {}
    for l in topo.fabric_links():
        ga, gb = topo.group_of[l.a], topo.group_of[l.b]
        if ga != gb:
            pair_links[(min(ga, gb), max(ga, gb))] = \
                pair_links.get((min(ga, gb), max(ga, gb)), 0) + 1
    assert all(n == 16 for n in pair_links.values())
    assert len(pair_links) == 6


def test_dragonfly_full_mesh_within_group():
    topo = tp.build_dragonfly(4, 4, 4)
    for g in range(4):
        members = [s for s in topo.switches if topo.group_of[s] == g]
        local = set()
        for l in topo.fabric_links():
            if l.a in members and l.b in members:
                local.add((min(l.a, l.b), max(l.a, l.b)))
        assert len(local) == 6  # C(4,2)


def test_desk_dragonfly_minimal_path_bounds():
    topo = tp.build_dragonfly(4, 4, 4)
    nodes = set(topo.switches)
    for s in topo.switches:
        dist = bfs_dist(topo.fabric_links(), s, nodes)
        for t in topo.switches:
            assert dist[t] <= 3
            assert topo.sw_dist[(s, t)] == dist[t]


def test_two_group_dragonfly_detours_through_the_other_group():
    topo = tp.build_dragonfly(2, 4, 2)
    # from any switch in group 0, the toward-group-1 hints exist and lead out
    for s in topo.switches:
        g = topo.group_of[s]
        other = 1 - g
        assert topo.group_dist[(s, other)] >= 1
        assert (s, other) in topo.group_next


def test_dragonfly_radix_overflow_rejected():
    with pytest.raises(tp.TopologyError):
        tp.build_dragonfly(4, 4, 4, global_links_per_group_pair=4, radix=8)


def test_failure_injection_identity_when_fraction_zero():
    topo = tp.build_fat_tree(pods=4, hosts_per_tor=4)
    plan = tp.FailurePlan(seed=3, fraction=0.0)
    assert tp.inject_failures(topo, plan) is topo


def test_failure_injection_degrades_to_twenty_gbps():
    topo = tp.build_fat_tree(pods=4, hosts_per_tor=4)
    plan = tp.FailurePlan(seed=3, fraction=0.01, degrade_factor=10)
    out = tp.inject_failures(topo, plan)
    degraded = [l for l in out.links if l.bandwidth_bps != tp.DEFAULT_BW_BPS]
    assert degraded and all(l.bandwidth_bps == 20 * 10 ** 9 for l in degraded)
    hostset = set(out.hosts)
    assert all(l.a not in hostset and l.b not in hostset for l in degraded)


def test_failure_injection_is_deterministic_per_seed():
    topo = tp.build_fat_tree(pods=4, hosts_per_tor=4)
    plan = tp.FailurePlan(seed=11, fraction=0.25, degrade_factor=10)
    a = tp.inject_failures(topo, plan)
    b = tp.inject_failures(topo, plan)
    assert [l.bandwidth_bps for l in a.links] == [l.bandwidth_bps for l in b.links]


def test_failure_injection_never_partitions():
    topo = tp.build_dragonfly(4, 4, 4)
    plan = tp.FailurePlan(seed=1, fraction=1.0, degrade_factor=10)
    out = tp.inject_failures(topo, plan)
    dist = bfs_dist(out.links, out.hosts[0], set(out.hosts) | set(out.switches))
    assert all(h in dist for h in out.hosts)


def test_fat_tree_hints_shrink_distance_monotonically():
    # every candidate next hop is one step closer to the destination, so a
    # routed path can never descend and re-ascend on a tree
    topo = tp.build_fat_tree(pods=4, hosts_per_tor=2)
    port_peer = {}
    for l in topo.links:
        port_peer[(l.a, l.a_port)] = l.b
        port_peer[(l.b, l.b_port)] = l.a
    for (s, dst), ports in topo.minimal_next.items():
        assert all(topo.sw_dist[(port_peer[(s, p)], dst)]
                   == topo.sw_dist[(s, dst)] - 1 for p in ports)


def test_export_edge_list_format():
    topo = tp.build_star(2)
    text = tp.export_edge_list(topo)
    lines = text.strip().splitlines()
    assert len(lines) == 2
    name, peer, bw, lat = lines[0].split()
    assert name == "t0" and peer == "h0"
    assert int(bw) == tp.DEFAULT_BW_BPS
    assert float(lat) == tp.DEFAULT_LAT_NS
