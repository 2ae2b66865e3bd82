"""Seeded random streams"""

import zlib

import numpy as np


def stream_key(name: str) -> int:
    """Stable 32-bit key for a named stream (Python's hash() is salted per process)."""
    return zlib.crc32(name.encode("utf-8"))


def make_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """
    Independent PCG64 stream for ``(seed, *keys)``.

    Streams for different keys are statistically independent, so per-image work
    can run in any order or in parallel and still draw the same numbers.
    """
    entropy = [int(seed)] + [stream_key(k) if isinstance(k, str) else int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
