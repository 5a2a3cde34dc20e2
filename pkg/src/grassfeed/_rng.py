"""Deterministic hierarchical random streams.

Every stochastic component draws from a Philox counter-based generator
keyed by ``(master_seed, *key)``.  The same key always yields the same
stream regardless of execution order, which keeps parallel Monte Carlo
trials byte-reproducible.
"""

import zlib

import numpy as np


def _key_to_ints(key):
    out = []
    for part in key:
        if isinstance(part, (bool, float)):
            raise TypeError(f"stream key parts must be int or str, got {part!r}")
        if isinstance(part, (int, np.integer)):
            out.append(int(part) & 0xFFFFFFFF)
        elif isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        else:
            raise TypeError(f"stream key parts must be int or str, got {part!r}")
    return tuple(out)


def rng_stream(master_seed, *key):
    """Generator for the sub-stream identified by ``key`` under ``master_seed``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=_key_to_ints(key))
    return np.random.Generator(np.random.Philox(ss))


def crandn(rng, *shape):
    """Circularly symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
