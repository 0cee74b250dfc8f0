"""Counter-based random streams.

Every stream is a Philox generator keyed by a tuple of integers, typically
``(seed, path_index, stream, k)``.  Draws for one key never depend on how many
other keys were used or in which order, so ensembles are reproducible under
any scheduling.
"""
from __future__ import annotations

import numpy as np

VELOCITY_NOISE = 0
EXPONENT = 1
INITIAL_DATA = 2
TEST_FUNCTIONS = 3


def _entropy(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def stream(seed, *keys: int) -> np.random.Generator:
    """Independent generator for ``seed`` (int or int sequence) and ``keys``."""
    entropy = _entropy(seed) + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds and keys must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
