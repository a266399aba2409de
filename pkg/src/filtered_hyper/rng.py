"""Seeded counter-based random streams.

Every random draw in the package goes through :func:`make_generator`, a Philox
bit generator, so a (seed, algorithm) pair regenerates the same numbers on any
machine. Child seeds are split off a master seed with :func:`derive_seed`.
"""

from __future__ import annotations

import numpy as np

from .config import RNG_ALGORITHM

__all__ = ["RNG_ALGORITHM", "make_generator", "derive_seed"]


def make_generator(seed: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(master: int, *path: int) -> int:
    """Deterministic child seed for the stream addressed by ``path``."""
    seq = np.random.SeedSequence(entropy=master, spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
