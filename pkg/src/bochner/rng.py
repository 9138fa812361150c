"""Reproducible, splittable random streams.

A stream is addressed by ``(master_seed, stream_id)`` where ``stream_id`` is a
path of non-negative integers. Streams are backed by the counter-based Philox
generator keyed through :class:`numpy.random.SeedSequence`, so distinct paths
give independent streams and the same path always replays the same numbers.
"""

from __future__ import annotations

import zlib
from typing import Iterable

import numpy as np

_MASK64 = (1 << 64) - 1


def stream_key(name: str) -> int:
    """Stable integer id for a named stream (independent of PYTHONHASHSEED)."""
    return zlib.crc32(name.encode("utf-8"))


class RngStream:
    def __init__(self, master_seed: int, stream_id: int | Iterable[int] = ()) -> None:
        if isinstance(stream_id, (int, np.integer)):
            stream_id = (int(stream_id),)
        self.master_seed = int(master_seed) & _MASK64
        self.stream_id = tuple(int(s) & _MASK64 for s in stream_id)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=self.stream_id)
        self.gen = np.random.Generator(np.random.Philox(seq))

    def child(self, key: int | str) -> "RngStream":
        """Independent sub-stream; does not depend on how much of ``self`` was consumed."""
        if isinstance(key, str):
            key = stream_key(key)
        return RngStream(self.master_seed, self.stream_id + (int(key),))

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id})"


def as_stream(rng: RngStream | int | None) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(int(np.random.SeedSequence().entropy) & _MASK64)
    return RngStream(int(rng))
