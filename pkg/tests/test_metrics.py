"""Statistics helpers and report files."""

import random

import pytest

from flowcutsim import metrics as mt
from flowcutsim import execute_run
from flowcutsim.packets import FlowKey
from conftest import build_cfg


def brute_percentile(values, q):
    """Smallest value with at least q% of the set at or below it."""
    ordered = sorted(values)
    n = len(ordered)
    for v in ordered:
        if sum(1 for x in ordered if x <= v) * 100 >= q * n:
            return v
    return ordered[-1]


def test_percentile_examples():
    assert mt.percentile([5], 99) == 5
    assert mt.percentile(list(range(1, 101)), 99) == 99
    assert mt.percentile([3, 1, 2], 0) == 1
    assert mt.percentile([3, 1, 2], 100) == 3


def test_percentile_against_brute_force_oracle():
    rng = random.Random(13)
    for _ in range(200):
        n = rng.randrange(1, 60)
        values = [rng.randrange(0, 1000) for _ in range(n)]
        q = rng.choice((1, 25, 50, 75, 90, 99, 100))
        assert mt.percentile(values, q) == brute_percentile(values, q)


def test_percentile_rejects_bad_input():
    with pytest.raises(ValueError):
        mt.percentile([], 50)
    with pytest.raises(ValueError):
        mt.percentile([1], 101)


def _metrics_with_flows(specs):
    m = mt.RunMetrics()
    for i, (ooo, paused, life) in enumerate(specs):
        key = FlowKey(i, i + 100, 40000, 4791)
        rec = mt.FlowRecord(key, i, i + 100, 1000, 0)
        rec.end_ps = life
        rec.ooo = ooo
        rec.paused_ps = paused
        m.flows[key] = rec
    return m


def test_ooo_fraction_cases():
    m = _metrics_with_flows([(0, 0, 10)])
    assert mt.ooo_fraction(m) == 0.0
    m.delivered_packets = 100
    m.flows[next(iter(m.flows))].ooo = 25
    assert mt.ooo_fraction(m) == 0.25


def test_draining_impact_mean_over_flows():
    # one flow paused half its lifetime, one never paused: mean is 0.25
    m = _metrics_with_flows([(0, 500, 1000), (0, 0, 1000)])
    assert mt.draining_impact(m) == pytest.approx(0.25)
    empty = mt.RunMetrics()
    assert mt.draining_impact(empty) == 0.0


def test_flows_csv_header_is_frozen():
    assert mt.FLOWS_CSV_HEADER == ("flow_key_hash,src,dst,size_bytes,start_ns,"
                                   "end_ns,fct_ns,ooo_packets,paused_ns,drains")


def test_flows_csv_row_shape():
    m = _metrics_with_flows([(2, 100, 1000)])
    text = mt.flows_csv(m)
    header, row = text.strip().splitlines()
    assert header == mt.FLOWS_CSV_HEADER
    fields = row.split(",")
    assert len(fields) == 10
    assert fields[7] == "2"


def test_reports_are_byte_identical_across_runs(tmp_path):
    cfg = build_cfg(topology__kind="star", topology__hosts="4",
                    workload__kind="fixed_pairs",
                    workload__pairs="0:1,2:3,1:2",
                    workload__message_bytes="65536",
                    routing__policy="flowcut")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    execute_run(cfg, 7, out_dir=str(out_a))
    execute_run(cfg, 7, out_dir=str(out_b))
    assert (out_a / "flows.csv").read_bytes() == (out_b / "flows.csv").read_bytes()
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()


def test_delivered_bytes_match_workload_total():
    cfg = build_cfg(topology__kind="fat_tree", topology__pods="2",
                    topology__hosts_per_tor="4",
                    workload__kind="all_to_all",
                    workload__message_bytes="1048576",
                    workload__exclude_same_tor="false")
    summary = execute_run(cfg, 1)
    n = 8
    assert summary["delivered_bytes"] == n * (n - 1) * 1048576


def test_throughput_timeline_sums_to_delivered_bytes():
    cfg = build_cfg(topology__kind="star", topology__hosts="4",
                    workload__kind="fixed_pairs", workload__pairs="0:1,2:3",
                    workload__message_bytes="262144")
    summary = execute_run(cfg, 1)
    total = sum(b for _, b in summary["throughput_timeline_ns_bytes"])
    assert total == summary["delivered_bytes"]
