"""Reproducible random substreams for the simulator.

Every stochastic actor in a run (each traffic generator, each router, each
monitor) owns an independent PCG64 stream whose seed is derived from the run
seed and the actor's identity via SHA-256. Splitting this way means adding
or removing one node never perturbs any other node's draws, and a run is a
pure function of (topology, config, scenario, seed).
"""

from __future__ import annotations

import hashlib

import numpy as np

_CHUNK = 1024
_SEP = b"\x1f"  # unit separator; cannot appear in whitespace-free node ids


class Stream:
    """Buffered uniform [0, 1) draws from one PCG64 substream."""

    __slots__ = ("_gen", "_buf", "_pos")

    def __init__(self, substream_seed: int):
        self._gen = np.random.Generator(np.random.PCG64(substream_seed))
        self._buf = self._gen.random(_CHUNK)
        self._pos = 0

    def random(self) -> float:
        pos = self._pos
        if pos == _CHUNK:
            self._buf = self._gen.random(_CHUNK)
            pos = 0
        self._pos = pos + 1
        return float(self._buf[pos])


def substream_seed(seed: int, *scope: str) -> int:
    """Derive a 128-bit PCG64 seed from the run seed and a scope path."""
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    material = seed.to_bytes(8, "little") + _SEP + _SEP.join(s.encode("utf-8") for s in scope)
    return int.from_bytes(hashlib.sha256(material).digest()[:16], "little")


def stream(seed: int, *scope: str) -> Stream:
    """Independent stream for one actor, e.g. stream(seed, "router", "5")."""
    return Stream(substream_seed(seed, *scope))
