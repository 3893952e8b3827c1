"""Deterministic, platform-independent random streams.

A stream is identified by a (master_seed, stream_id) pair and backed by the
counter-based Philox bit generator, so the same pair produces the same bits
on every platform. Sub-streams are derived by mixing integer tags into the
stream id with splitmix64; derived streams are statistically independent of
each other and of their parent, which makes per-sample or per-fold work
deterministic regardless of scheduling order.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .errors import InvalidInputError

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class SeedSpec:
    """Identity of one reproducible random stream."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise InvalidInputError("master_seed must fit in 64 unsigned bits")
        if self.stream_id < 0:
            raise InvalidInputError("stream_id must be non-negative")

    def derive(self, *tags: int) -> "SeedSpec":
        """Child stream obtained by folding integer tags into the stream id."""
        sid = self.stream_id & _MASK64
        for tag in tags:
            sid = _splitmix64(sid ^ _splitmix64(tag & _MASK64))
        return SeedSpec(self.master_seed, sid)

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """n standard-normal variates via Box-Muller on the uniform stream.

    Consumption order is pinned for reproducibility: one block of
    2*ceil(n/2) uniforms is drawn, u1 = block[0::2], u2 = block[1::2], and
    the outputs are interleaved [z0_0, z1_0, z0_1, z1_1, ...] truncated to n.
    """
    if n < 0:
        raise InvalidInputError("sample count must be non-negative")
    if n == 0:
        return np.empty(0)
    pairs = (n + 1) // 2
    block = gen.random(2 * pairs)
    u1 = 1.0 - block[0::2]  # in (0, 1], keeps the log finite
    u2 = block[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    z0 = radius * np.cos(2.0 * pi * u2)
    z1 = radius * np.sin(2.0 * pi * u2)
    out = np.empty(2 * pairs)
    out[0::2] = z0
    out[1::2] = z1
    return out[:n]
