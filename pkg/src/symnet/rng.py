"""Seeded, counter-based random streams.

Every stochastic operation in the package takes an explicit
``numpy.random.Generator``.  ``make_rng`` builds one on top of the Philox
counter-based bit generator so that independent sub-streams can be derived
from a single integer seed plus a tuple of integer or string keys.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(k: int | str) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    if k < 0:
        raise ValueError(f"stream keys must be nonnegative, got {k}")
    return int(k)


def make_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """Return a Philox generator for ``seed`` and the sub-stream ``keys``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))
