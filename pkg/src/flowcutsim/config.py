"""Experiment configuration: a diff-friendly `key = value` text format.

Grammar: one `dotted.key = value` per line, `#` comments, blank lines ignored.
Types come from the schema below; unknown keys are rejected. Lists are
comma-separated. Round-trip is exact: parse -> serialize -> parse is identity.
"""

import hashlib

from . import routing


class ConfigError(ValueError):
    pass


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError("expected a boolean, got %r" % (text,))


def _int_list(text):
    return [int(v.strip()) for v in text.split(",") if v.strip()]


def _pairs(text):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            a, b = item.split(":")
            out.append((int(a), int(b)))
        except ValueError:
            raise ConfigError("bad pair %r, want src:dst" % (item,)) from None
    return out


_TAPERS = {"1:1": 1, "2:1": 2}

# key -> (parser, default, choices-or-None)
SCHEMA = {
    "topology.kind": (str, "fat_tree", ("fat_tree", "dragonfly", "star")),
    "topology.pods": (int, 4, None),
    "topology.hosts_per_tor": (int, 8, None),
    "topology.taper": (str, "1:1", tuple(_TAPERS)),
    "topology.groups": (int, 4, None),
    "topology.switches_per_group": (int, 4, None),
    "topology.hosts_per_switch": (int, 4, None),
    "topology.global_links_per_pair": (int, 1, None),
    "topology.radix": (int, 0, None),
    "topology.hosts": (int, 2, None),
    "network.bandwidth_gbps": (float, 200.0, None),
    "network.latency_ns": (float, 1000.0, None),
    "network.buffer_bytes": (int, 262144, None),
    "network.mtu_bytes": (int, 2048, None),
    "routing.policy": (str, "ecmp", routing.POLICIES),
    "routing.alpha": (float, 0.9, None),
    "routing.rtt_ratio_threshold": (float, 4.0, None),
    "routing.rtt_growth_threshold": (float, 0.5, None),
    "routing.flowlet_preset": (str, "balanced", tuple(routing.FLOWLET_PRESETS_NS)),
    "routing.flowlet_timeout_us": (float, 0.0, None),
    "routing.flowcell_budget_bytes": (int, 65536, None),
    "routing.partial_resume_ood": (int, 0, None),
    "routing.table_capacity": (int, 65536, None),
    "host.resume_timeout_us": (float, -1.0, None),
    "host.xon_loss_probability": (float, 0.0, None),
    "workload.kind": (str, "permutation",
                      ("permutation", "all_to_all", "random_uniform", "fixed_pairs")),
    "workload.message_bytes": (int, 1048576, None),
    "workload.flows_per_host": (int, 1, None),
    "workload.cdf": (str, "websearch", None),
    "workload.pairs": (str, "", None),
    "workload.exclude_same_tor": (_bool, True, None),
    "failures.fraction": (float, 0.0, None),
    "failures.degrade_factor": (int, 10, None),
    "failures.seed": (int, -1, None),
    "seeds": (_int_list, [1], None),
    "metrics.bucket_us": (int, 10, None),
    "sim.invariant_checks": (_bool, False, None),
}


def default_config():
    return {k: (v[1][:] if isinstance(v[1], list) else v[1])
            for k, v in SCHEMA.items()}


def set_value(cfg, key, raw):
    if key not in SCHEMA:
        raise ConfigError("unknown config key %r" % (key,))
    parser, _, choices = SCHEMA[key]
    if isinstance(raw, str):
        try:
            value = parser(raw.strip())
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError("bad value %r for %s" % (raw, key)) from None
    else:
        value = raw
    if choices is not None and value not in choices:
        raise ConfigError("%s must be one of %s, got %r"
                          % (key, "/".join(choices), value))
    cfg[key] = value


def parse_config(text):
    cfg = default_config()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value'" % lineno)
        key, _, value = line.partition("=")
        set_value(cfg, key.strip(), value)
    validate(cfg)
    return cfg


def load_config(path):
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc)) from None


def serialize(cfg):
    lines = []
    for key in sorted(cfg):
        value = cfg[key]
        if isinstance(value, list):
            text = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, float):
            text = repr(value)
        else:
            text = str(value)
        lines.append("%s = %s" % (key, text))
    return "\n".join(lines) + "\n"


def digest(cfg):
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()[:16]


def taper_value(cfg):
    return _TAPERS[cfg["topology.taper"]]


def validate(cfg):
    if cfg["network.bandwidth_gbps"] <= 0:
        raise ConfigError("network.bandwidth_gbps must be > 0")
    if cfg["network.mtu_bytes"] < 1:
        raise ConfigError("network.mtu_bytes must be >= 1")
    if cfg["network.buffer_bytes"] < cfg["network.mtu_bytes"]:
        raise ConfigError("buffer must hold at least one MTU-sized frame")
    if not 0.0 <= cfg["failures.fraction"] <= 1.0:
        raise ConfigError("failures.fraction must be in [0, 1]")
    if cfg["failures.degrade_factor"] < 1:
        raise ConfigError("failures.degrade_factor must be >= 1")
    if not 0.0 < cfg["routing.alpha"] <= 1.0:
        raise ConfigError("routing.alpha must be in (0, 1]")
    if cfg["routing.rtt_ratio_threshold"] < 1.0:
        raise ConfigError("routing.rtt_ratio_threshold must be >= 1")
    if cfg["routing.rtt_growth_threshold"] <= 0.0:
        raise ConfigError("routing.rtt_growth_threshold must be > 0")
    if not 0.0 <= cfg["host.xon_loss_probability"] <= 1.0:
        raise ConfigError("host.xon_loss_probability must be in [0, 1]")
    if not cfg["seeds"]:
        raise ConfigError("seeds must name at least one seed")
    policy = cfg["routing.policy"]
    if policy in (routing.UGAL, routing.VALIANT) and \
            cfg["topology.kind"] != "dragonfly":
        raise ConfigError("%s routing needs a dragonfly topology" % policy)
    if cfg["workload.kind"] == "fixed_pairs" and not cfg["workload.pairs"]:
        raise ConfigError("fixed_pairs workload needs workload.pairs")
    return cfg


def workload_pairs(cfg):
    return _pairs(cfg["workload.pairs"])
