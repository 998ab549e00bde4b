"""Small shared helpers."""

import hashlib


def derive_seed(seed, *scope):
    """Stable 64-bit substream seed from a run seed and a scope path."""
    text = "%d/%s" % (seed, "/".join(str(s) for s in scope))
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")
