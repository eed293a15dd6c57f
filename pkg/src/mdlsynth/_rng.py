"""Deterministic RNG substream derivation.

All randomness in the package flows from a single master seed through named
substreams (``datagen``, ``init``, ``training-shuffle``, ``gumbel``,
``trial-scheduling``, ...), so parallel workers get decorrelated yet
reproducible streams and each component can be re-run in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, *parts: object) -> int:
    """Hash (master seed, substream name/indices) into a 64-bit child seed."""
    payload = repr((int(master),) + parts).encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")


def substream(master: int, *parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *parts))
