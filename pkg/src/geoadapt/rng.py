"""Deterministic random-number streams.

Every stochastic operation takes an integer seed and derives its generator
through ``rng_from(seed, *path)``: a counter-based Philox generator keyed by
a SeedSequence with the path as spawn key.  Distinct paths give independent
streams; the same (seed, path) is bit-reproducible on a given platform.
Path elements may be short strings (encoded to integers) so call sites can
use readable stream tags.
"""

from __future__ import annotations

import numpy as np


def _encode(part: int | str) -> int:
    if isinstance(part, str):
        return int.from_bytes(part.encode("utf-8"), "little")
    return int(part)


def rng_from(seed: int, *path: int | str) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_encode(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed: int | np.random.Generator, *path: int | str) -> np.random.Generator:
    """Pass an existing Generator through; derive one from an integer seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return rng_from(seed, *path)
