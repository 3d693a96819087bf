"""Deterministic substream derivation for seeded Monte Carlo work.

Every random draw in the package comes from a generator keyed by a
(seed, tag, ...) tuple, so independent components (bootstrap replicates,
simulated columns, per-step plans) never share or race a stream.
"""
from __future__ import annotations

import numpy as np


def substream(*key: int) -> np.random.Generator:
    """Independent PCG64 generator for an integer key tuple."""
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def derive_seed(*key: int) -> int:
    """Collapse an integer key tuple to one unsigned 64-bit seed."""
    return int(np.random.SeedSequence(list(key)).generate_state(1, np.uint64)[0])
