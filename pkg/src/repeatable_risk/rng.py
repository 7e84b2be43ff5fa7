"""Seeded random streams.

Every stream used by the package is derived from integers only, so a trial is
reproducible from ``(master_seed, trial_index)`` and the rounding grid from
``grid_seed`` alone.
"""

import zlib

import numpy as np


def _label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def make_stream(seed: int, *keys, label: str = "default") -> np.random.Generator:
    """Return an independent PCG64 generator for ``(seed, *keys, label)``.

    Distinct key tuples give statistically independent streams (SeedSequence
    hashing), and the same tuple always gives the same stream.
    """
    entropy = [int(seed), *(int(k) for k in keys), _label_key(label)]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds and keys must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def trial_stream(master_seed: int, trial_index: int, label: str = "trial") -> np.random.Generator:
    return make_stream(master_seed, trial_index, label=label)


def grid_stream(grid_seed: int) -> np.random.Generator:
    return make_stream(grid_seed, label="rounding-grid")
