"""Deterministic pseudo-random streams for the simulation engine.

A stream is identified by (seed, stream_index).  Stream state is built by
mixing the index into the seed and running splitmix64 four times, then
iterating xoshiro256++.  Streams with different indices are statistically
independent for any fixed seed, which lets the simulation engine hand one
stream to every work chunk and stay reproducible no matter how chunks are
scheduled across threads.

The compiled kernel re-implements exactly this generator in C; both
produce identical uniforms bit for bit for the same (seed, stream_index).
"""
from __future__ import annotations

__all__ = ["RngStream"]

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 2.0 ** -53


def _splitmix64(state: int) -> tuple[int, int]:
    # returns (next state, output)
    state = (state + _GOLDEN) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class RngStream:
    """One xoshiro256++ stream addressed by (seed, stream_index).

    Args:
        seed: base seed, any non-negative integer (used modulo 2**64).
        stream_index: non-negative sub-stream number; index i mixes
            (i+1) * golden-ratio-constant into the seed before expansion,
            so stream 0 differs from the raw seed stream of other tools.
    """

    __slots__ = ("seed", "stream_index", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int, stream_index: int = 0) -> None:
        if seed < 0:
            raise ValueError(f"seed must be >= 0, got {seed}")
        if stream_index < 0:
            raise ValueError(f"stream_index must be >= 0, got {stream_index}")
        self.seed = seed & _MASK64
        self.stream_index = stream_index
        sm = self.seed ^ (((stream_index + 1) * _GOLDEN) & _MASK64)
        sm, self._s0 = _splitmix64(sm)
        sm, self._s1 = _splitmix64(sm)
        sm, self._s2 = _splitmix64(sm)
        sm, self._s3 = _splitmix64(sm)

    def next_uint64(self) -> int:
        """Next raw 64-bit output."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def next_uniform(self) -> float:
        """Uniform double in [0, 1), 53 random bits: (x >> 11) * 2**-53."""
        return (self.next_uint64() >> 11) * _INV_2_53

    def uniforms(self, n: int) -> list[float]:
        """The next n uniforms as a list."""
        return [self.next_uniform() for _ in range(n)]

    def __repr__(self) -> str:  # pragma: no cover
        return f"RngStream(seed={self.seed}, stream_index={self.stream_index})"
