"""Seeded, platform-independent random streams.

Every randomized routine takes a ``numpy.random.Generator``.  Independent
streams for workers or sub-experiments come from ``SeedSequence`` spawn
keys, so a result depends only on ``(seed, stream index)`` and never on
scheduling.
"""

from __future__ import annotations

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed``, optionally on a derived sub-stream."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def random_messages(rng: np.random.Generator, k: int, n: int) -> np.ndarray:
    """``n`` i.i.d. uniform message indices in ``0..k-1``."""
    return rng.integers(0, k, size=n, dtype=np.int64)


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def iid_bytes(rng: np.random.Generator, pmf, n: int) -> bytes:
    """``n`` bytes drawn i.i.d. from a pmf over ``0..len(pmf)-1``."""
    p = np.asarray(pmf, dtype=float)
    return rng.choice(p.size, size=n, p=p / p.sum()).astype(np.uint8).tobytes()
