"""Seeded random streams.

Every stream is addressed by ``(master_seed, label, index)`` and built on the
counter-based Philox generator, so a replication draws the same numbers no
matter which process or in which order it runs.
"""
import hashlib

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

from lab.exceptions import InvalidParameter

SEED_MAX = 2**64 - 1

_UNIT_BITS = 52
_UNIT_SCALE = float(2**_UNIT_BITS)


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InvalidParameter(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= SEED_MAX:
        raise InvalidParameter(f"seed must lie in [0, 2**64 - 1], got {seed}")
    return int(seed)


def label_key(label):
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def derive_stream(master_seed, label, index=0):
    sequence = SeedSequence([check_seed(master_seed), label_key(label), int(index)])
    return Generator(Philox(sequence))


def open_unit(rng, size):
    """Uniforms on the open interval (0, 1), one 64-bit draw each."""
    draws = rng.integers(0, 2**_UNIT_BITS, size=size, dtype=np.int64)
    return (draws + 0.5) / _UNIT_SCALE
