"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator seeded by
``numpy.random.SeedSequence(entropy=seed, spawn_key=(domain, *keys))``.
The domain tag keeps streams of different subsystems apart even when the
caller reuses one seed for everything; the remaining keys split a domain
into independent substreams (per cycle and qubit, per trajectory, per
sample block). SeedSequence and PCG64 are specified bit-for-bit, so the
streams are reproducible on any platform.
"""

from __future__ import annotations

import numpy as np

# Domain tags. Never renumber: they are part of the reproducibility contract.
CIRCUIT_GATES = 1
SAMPLE_BLOCK = 2
TRAJECTORY_NOISE = 3
TRAJECTORY_DRAW = 4
COIN_TOSS = 5

MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def substream(seed: int, domain: int, *keys: int) -> np.random.Generator:
    """Return the generator for ``(seed, domain, *keys)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=(domain, *keys))
    return np.random.Generator(np.random.PCG64(ss))
