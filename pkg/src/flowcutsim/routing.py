"""Output-port selection: ECMP, spraying, flowlet, flowcell, UGAL helpers.

These are the policy primitives switches compose. They operate on candidate
port tuples plus a queue-depth callable so they stay independent of the
datapath and directly testable.
"""

import struct
import zlib

ECMP = "ecmp"
SPRAYING = "spraying"
FLOWLET = "flowlet"
FLOWCELL = "flowcell"
FLOWCUT = "flowcut"
FLOWCUT_NIC = "flowcut_nic"
UGAL = "ugal"
VALIANT = "valiant"

POLICIES = (ECMP, SPRAYING, FLOWLET, FLOWCELL, FLOWCUT, FLOWCUT_NIC, UGAL, VALIANT)

# Flowlet gap presets (nanoseconds). The timeout that trades performance for
# reordering is workload-dependent, so three named operating points ship and
# sweeps calibrate per experiment.
FLOWLET_PRESETS_NS = {
    "best": 5_000,
    "balanced": 20_000,
    "lowest_ooo": 100_000,
}

_SALT_STRUCT = struct.Struct(">I")


def ecmp_port(key, salt, candidates):
    """Deterministic 5-tuple hash into the candidate set, stable across a run."""
    h = zlib.crc32(key.wire + _SALT_STRUCT.pack(salt & 0xFFFFFFFF))
    return candidates[h % len(candidates)]


def least_loaded(candidates, depth_of):
    """Smallest queued bytes wins; ties break to the lowest port id."""
    best = candidates[0]
    best_depth = depth_of(best)
    for port in candidates[1:]:
        d = depth_of(port)
        if d < best_depth:
            best, best_depth = port, d
    return best


def spray_port(rng, candidates):
    return candidates[rng.randrange(len(candidates))]


def flowlet_port(state, key, now_ps, timeout_ps, candidates, depth_of):
    """Stored port unless the inter-packet gap exceeds the flowlet timeout."""
    slot = state.get(key)
    if slot is not None and now_ps - slot[1] <= timeout_ps and slot[0] in candidates:
        slot[1] = now_ps
        return slot[0]
    port = least_loaded(candidates, depth_of)
    state[key] = [port, now_ps]
    return port


def flowcell_port(state, key, size, budget_bytes, candidates, depth_of):
    """Stored port until the byte budget is exhausted, then least loaded."""
    slot = state.get(key)
    if slot is not None and slot[1] + size <= budget_bytes and slot[0] in candidates:
        slot[1] += size
        return slot[0]
    port = least_loaded(candidates, depth_of)
    state[key] = [port, size]
    return port


def ugal_prefers_nonminimal(q_min, h_min, q_nonmin, h_nonmin):
    """Queue-depth x hop-count comparison; ties go minimal."""
    return q_min * h_min > q_nonmin * h_nonmin


def select_output_port(policy, key, psn, candidates, depth_of, rng,
                       state=None, now_ps=0, size=0,
                       flowlet_timeout_ps=0, flowcell_budget=0, salt=0):
    """Single-call policy dispatch over a candidate set.

    UGAL and Valiant need topology phase context and are composed inside the
    switch; every other policy is served here.
    """
    if not candidates:
        raise ValueError("empty candidate set")
    if policy == ECMP:
        return ecmp_port(key, salt, candidates)
    if policy == SPRAYING:
        return spray_port(rng, candidates)
    if policy == FLOWLET:
        return flowlet_port(state, key, now_ps, flowlet_timeout_ps, candidates, depth_of)
    if policy == FLOWCELL:
        return flowcell_port(state, key, size, flowcell_budget, candidates, depth_of)
    if policy in (FLOWCUT, FLOWCUT_NIC):
        return least_loaded(candidates, depth_of)
    raise ValueError("policy %r is not served by select_output_port" % (policy,))
