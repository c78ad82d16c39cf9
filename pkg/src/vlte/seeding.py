"""Counter-based seed derivation.

Every random stream in a run descends from one 64-bit root seed.  A child
stream is addressed by ``(label, index)``: the label is hashed with CRC-32 and
used together with the index as the SeedSequence spawn key, so a trial's
randomness depends only on the root, its label and its trial number, never on
how many trials ran before it.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(root: int, label: str, index: int = 0) -> int:
    ss = np.random.SeedSequence(int(root) & MASK64, spawn_key=(zlib.crc32(label.encode()), int(index)))
    lo, hi = ss.generate_state(2, np.uint32)
    return int(hi) << 32 | int(lo)


def rng_for(root: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(root, label, index))
