"""Named random sub-streams derived from one master seed.

Each stream is keyed by its name, so adding a new consumer never shifts the
draws seen by existing ones.
"""
from __future__ import annotations

import zlib

import numpy as np


def substream(master_seed: int, *names) -> np.random.Generator:
    keys = [int(master_seed)] + [zlib.crc32(str(name).encode()) for name in names]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(keys)))
