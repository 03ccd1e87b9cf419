"""Deterministic splitting of one master seed into independent streams.

Every random draw in the package goes through ``stream(seed, phase, *index)``.
The phase name is hashed to a stable integer, so the stream for
(phase, index) never depends on how many other streams were drawn first.
"""
import zlib

import numpy as np


def phase_code(phase: str) -> int:
    return zlib.crc32(phase.encode("utf-8"))


def stream(seed: int, phase: str, *index: int) -> np.random.Generator:
    key = (phase_code(phase),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def subseed(seed: int, phase: str, *index: int) -> int:
    """A derived integer seed, for handing to functions that take a seed."""
    key = (phase_code(phase),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    lo, hi = (int(x) for x in ss.generate_state(2, dtype=np.uint32))
    return lo | (hi << 32)
