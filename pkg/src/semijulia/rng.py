"""Vectorized splitmix64 streams.

Reproducible runs are part of the external contract, so randomness comes
from a fixed, dependency-free generator rather than numpy's default.
"""
from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """One independent splitmix64 stream per lane."""

    def __init__(self, seed: int, lanes: int = 1):
        base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        lane_ids = np.arange(1, lanes + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            self.state = _mix(base + lane_ids * _GAMMA)

    def next_u64(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            self.state = self.state + _GAMMA
            return _mix(self.state.copy())

    def next_below(self, n: int) -> np.ndarray:
        """Uniform integers in [0, n) per lane (64-bit modulo; bias < 2^-59)."""
        return (self.next_u64() % np.uint64(n)).astype(np.int64)
