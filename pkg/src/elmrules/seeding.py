"""Deterministic seed fan-out shared by every module."""

import zlib

import numpy as np


def _tag_int(tag) -> int:
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    return int(tag)


def derive_seed(seed: int, *tags) -> int:
    """Return a 32-bit seed that depends only on ``seed`` and ``tags``.

    String tags are hashed with CRC32 so the mapping is stable across
    interpreter runs (unlike ``hash``).
    """
    entropy = [int(seed) & 0xFFFFFFFF] + [_tag_int(t) & 0xFFFFFFFF for t in tags]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def rng_for(seed: int, *tags) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *tags))
