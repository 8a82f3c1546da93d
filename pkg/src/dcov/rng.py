"""Deterministic random-stream derivation.

Every randomized operation in the package derives its generator from a
user seed plus a structural key (replicate index, chunk index, ...), so
results are bit-identical no matter how work is partitioned across
threads or processes.
"""

from __future__ import annotations

import numpy as np


def derived_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator whose stream is a pure function of (seed, key)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def subseed(seed: int, key: int) -> int:
    """Derived integer seed, for handing to an operation that seeds itself."""
    return int(
        np.random.SeedSequence(entropy=seed, spawn_key=(key,)).generate_state(1)[0]
    )
