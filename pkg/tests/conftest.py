import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from flowcutsim import config as configmod


def build_cfg(**overrides):
    """Config dict from keyword overrides written as dotted keys with __."""
    cfg = configmod.default_config()
    for key, value in overrides.items():
        cfg_key = key.replace("__", ".")
        configmod.set_value(cfg, cfg_key, value if isinstance(value, str) else str(value))
    configmod.validate(cfg)
    return cfg


DESK_FT = dict(topology__kind="fat_tree", topology__pods="4",
               topology__hosts_per_tor="8", network__buffer_bytes="65536")
DESK_DF = dict(topology__kind="dragonfly", topology__groups="4",
               topology__switches_per_group="4", topology__hosts_per_switch="4",
               topology__global_links_per_pair="4", network__buffer_bytes="65536")
