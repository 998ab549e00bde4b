"""Closed-form resource models against independent evaluations."""

import random

import pytest

from flowcutsim import analytics as an


def mib(x):
    return x / (1024.0 * 1024.0)


def test_active_flows_regime_one():
    # H=1024, f=1, B=200 Gb/s, l=5 us, M=2 KiB: 61.04 packets in flight per
    # flow, so every flow is active
    inputs = an.ResourceModelInputs(1024, 1, 200e9, 5e-6, 2048)
    assert an.active_flows(inputs) == 1024


def test_active_flows_regime_two():
    # f=10^4 pushes each flow below one in-flight packet: the host cap rules
    inputs = an.ResourceModelInputs(1024, 10_000, 200e9, 5e-6, 2048)
    expected = 1024 * (200e9 / 8) * 5e-6 / 2048  # 62500 flows
    assert an.active_flows(inputs) == pytest.approx(expected)
    assert an.active_flows(inputs) == pytest.approx(62500, rel=1e-6)


def test_more_flows_beyond_the_boundary_change_nothing():
    base = an.ResourceModelInputs(1024, 1000, 200e9, 5e-6, 2048)
    more = an.ResourceModelInputs(1024, 100_000, 200e9, 5e-6, 2048)
    assert an.active_flows(base) == an.active_flows(more)


def test_active_flows_against_min_form_oracle():
    # independent expression: F = H * min(f, B*l / (8*M)), checked over a grid
    rng = random.Random(99)
    checked = 0
    for _ in range(100):
        h = rng.choice((64, 128, 1024, 4096))
        f = rng.choice((1, 2, 10, 100, 1000, 10_000, 100_000))
        b = rng.choice((100e9, 200e9, 400e9, 800e9, 1.6e12))
        l = rng.choice((1e-6, 2e-6, 5e-6, 20e-6, 50e-6))
        m = rng.choice((1024, 2048, 4096))
        inputs = an.ResourceModelInputs(h, f, b, l, m)
        oracle = h * min(f, (b / 8.0) * l / m)
        assert an.active_flows(inputs) == pytest.approx(oracle, rel=1e-12)
        checked += 1
    assert checked == 100


def test_memory_stays_under_seven_mib_at_fifty_microseconds():
    inputs = an.ResourceModelInputs(1024, 10_000, 200e9, 50e-6, 2048,
                                    per_flow_bytes=11)
    occ = an.memory_occupancy(inputs)
    assert mib(occ) < 7.0
    assert mib(occ) > 6.0  # about 6.6 MiB


def test_flowcell_memory_is_two_elevenths_of_flowcut():
    flowcut = an.ResourceModelInputs(1024, 10_000, 200e9, 50e-6, 2048,
                                     per_flow_bytes=11)
    flowcell = an.ResourceModelInputs(1024, 10_000, 200e9, 50e-6, 2048,
                                      per_flow_bytes=2)
    assert an.memory_occupancy(flowcell) == \
        pytest.approx(an.memory_occupancy(flowcut) * 2 / 11)


def test_zero_latency_means_zero_memory():
    inputs = an.ResourceModelInputs(1024, 10, 200e9, 0.0, 2048)
    assert an.memory_occupancy(inputs) == 0.0


def test_memory_monotone_in_hosts_bandwidth_latency():
    base = an.ResourceModelInputs(1024, 10_000, 200e9, 5e-6, 2048)
    ref = an.active_flows(base)
    assert an.active_flows(an.ResourceModelInputs(2048, 10_000, 200e9, 5e-6, 2048)) >= ref
    assert an.active_flows(an.ResourceModelInputs(1024, 10_000, 400e9, 5e-6, 2048)) >= ref
    assert an.active_flows(an.ResourceModelInputs(1024, 10_000, 200e9, 10e-6, 2048)) >= ref


def test_ack_overhead_values():
    assert an.ack_overhead(1024) == pytest.approx(20 / 1024)
    assert an.ack_overhead(1024) < 0.02
    assert an.ack_overhead(2048) == pytest.approx(0.009765625)
    assert an.ack_overhead(20) == 1.0
    with pytest.raises(ValueError):
        an.ack_overhead(0)


def test_effective_payload_subtracts_timing_header():
    assert an.effective_payload(2048) == 2045
    with pytest.raises(ValueError):
        an.effective_payload(3)


def test_model_table_single_axis():
    header, rows = an.model_table(
        "memory", {"latency_s": [1e-6, 5e-6, 50e-6]},
        {"hosts": 1024, "flows_per_host": 10_000, "bandwidth_bps": 200e9,
         "mtu_bytes": 2048, "per_flow_bytes": 11, "latency_s": 0})
    assert header == ("latency_s", "memory")
    values = [v for _, v in rows]
    assert values == sorted(values)  # memory grows with latency
