"""Deterministic sub-seed derivation.

All randomness in a run flows from one master seed; each stage derives its
own sub-seed from (master, stage name) so stages are individually
reproducible on any platform.
"""

import hashlib


def derive_seed(master: int, stage: str) -> int:
    digest = hashlib.sha256(f"{master}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big")
