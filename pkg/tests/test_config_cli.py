"""Config grammar, CLI verbs, and exit codes."""

import json
import os
import subprocess
import sys

import pytest

from flowcutsim import config as cm
from flowcutsim import cli

SRC = os.path.join(os.path.dirname(__file__), "..", "src")


def run_cli(args, cwd):
    env = dict(os.environ, PYTHONPATH=SRC)
    return subprocess.run([sys.executable, "-m", "flowcutsim.cli"] + args,
                          capture_output=True, text=True, cwd=cwd, env=env)


MINIMAL = """
topology.kind = star
topology.hosts = 2
workload.kind = fixed_pairs
workload.pairs = 0:1
workload.message_bytes = 1024
routing.policy = ecmp
"""


def test_parse_defaults_and_overrides():
    cfg = cm.parse_config(MINIMAL)
    assert cfg["topology.kind"] == "star"
    assert cfg["network.mtu_bytes"] == 2048  # default preserved


def test_unknown_key_rejected():
    with pytest.raises(cm.ConfigError):
        cm.parse_config("topology.kindd = star")


def test_bad_choice_rejected():
    with pytest.raises(cm.ConfigError):
        cm.parse_config("routing.policy = shortest")


def test_round_trip_is_identity():
    cfg = cm.parse_config(MINIMAL)
    text = cm.serialize(cfg)
    again = cm.parse_config(text)
    assert again == cfg
    assert cm.serialize(again) == text


def test_validation_guards():
    with pytest.raises(cm.ConfigError):
        cm.parse_config("failures.fraction = 1.5")
    with pytest.raises(cm.ConfigError):
        cm.parse_config("routing.alpha = 0")
    with pytest.raises(cm.ConfigError):
        cm.parse_config("routing.policy = ugal")  # needs dragonfly
    with pytest.raises(cm.ConfigError):
        cm.parse_config("workload.kind = fixed_pairs")  # pairs missing


def test_cli_run_writes_reports(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL)
    res = run_cli(["run", str(cfg_path), "--out", "results"], str(tmp_path))
    assert res.returncode == 0, res.stderr
    flows = (tmp_path / "results" / "seed_1" / "flows.csv").read_text()
    assert flows.count("\n") == 2  # header + one flow
    summary = json.loads((tmp_path / "results" / "seed_1" / "summary.json").read_text())
    assert summary["flow_count"] == 1


def test_cli_same_seed_twice_is_byte_identical(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL)
    run_cli(["run", str(cfg_path), "--out", "a"], str(tmp_path))
    run_cli(["run", str(cfg_path), "--out", "b"], str(tmp_path))
    fa = (tmp_path / "a" / "seed_1" / "flows.csv").read_bytes()
    fb = (tmp_path / "b" / "seed_1" / "flows.csv").read_bytes()
    sa = (tmp_path / "a" / "seed_1" / "summary.json").read_bytes()
    sb = (tmp_path / "b" / "seed_1" / "summary.json").read_bytes()
    assert fa == fb and sa == sb


def test_cli_config_error_exit_code(tmp_path):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text("topology.kind = moebius\n")
    res = run_cli(["run", str(cfg_path)], str(tmp_path))
    assert res.returncode == 1
    assert "config error" in res.stderr


def test_cli_deadlock_exit_code(tmp_path):
    cfg_path = tmp_path / "dead.cfg"
    cfg_path.write_text("""
topology.kind = star
topology.hosts = 4
workload.kind = fixed_pairs
workload.pairs = 0:3,1:3,2:3
workload.message_bytes = 1048576
routing.policy = flowcut
routing.rtt_ratio_threshold = 1.5
host.xon_loss_probability = 1.0
host.resume_timeout_us = 0
network.buffer_bytes = 65536
""")
    res = run_cli(["run", str(cfg_path), "--seed", "5"], str(tmp_path))
    assert res.returncode == 2
    assert "deadlock" in res.stderr


def test_cli_sweep_one_row_per_cell_per_seed(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL + "seeds = 1,2\n")
    res = run_cli(["sweep", str(cfg_path),
                   "--axis", "network.mtu_bytes=1024,2048",
                   "--jobs", "1", "--out", "sweep.csv"], str(tmp_path))
    assert res.returncode == 0, res.stderr
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert lines[0].startswith("network.mtu_bytes,seed,")
    assert len(lines) == 1 + 2 * 2


def test_cli_model_memory_table(tmp_path):
    res = run_cli(["model", "memory", "--axis", "latency_s=1e-6,5e-6",
                   "--set", "flows_per_host=10000"], str(tmp_path))
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "latency_s,memory"
    assert len(lines) == 3


def test_cli_export_topology(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL)
    res = run_cli(["export-topology", str(cfg_path), "--out", "topo.txt"],
                  str(tmp_path))
    assert res.returncode == 0
    lines = (tmp_path / "topo.txt").read_text().strip().splitlines()
    assert len(lines) == 2
    assert all(len(l.split()) == 4 for l in lines)


def test_main_entry_point_smoke(tmp_path):
    cfg_path = tmp_path / "exp.cfg"
    cfg_path.write_text(MINIMAL)
    rc = cli.main(["run", str(cfg_path), "--out", str(tmp_path / "r")])
    assert rc == 0
