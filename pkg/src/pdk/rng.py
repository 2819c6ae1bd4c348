"""Deterministic, splittable randomness.

Every randomized routine takes an integer seed and derives child seeds by
hashing (seed, *labels) with sha256, so results are stable across processes
and platforms regardless of PYTHONHASHSEED.
"""

from __future__ import annotations

import hashlib
import random


def child_seed(seed: int, *labels) -> int:
    payload = repr((int(seed),) + tuple(labels)).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def child_rng(seed: int, *labels) -> random.Random:
    return random.Random(child_seed(seed, *labels))
