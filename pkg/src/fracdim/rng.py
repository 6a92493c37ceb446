"""Deterministic seeded randomness built on splitmix64.

Every randomized operation in the package owns a stream derived from
(seed, *indices), so results never depend on execution order or thread
count. The generator is counter-based: output k of a stream is a pure
function of (state0, k), which also allows bit-identical vectorized
generation.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 output function (finalizer) on a 64-bit value."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


def derive_state(seed: int, *indices: int) -> int:
    """Fold stream indices into a 64-bit starting state.

    Each index is mixed in separately so (seed, 1, 0) and (seed, 0, 1)
    land in unrelated states.
    """
    state = mix64(seed & _MASK)
    for ix in indices:
        state = mix64((state + _GAMMA) ^ mix64(ix & _MASK))
    return state


class SplitMix64:
    """Sequential splitmix64 stream: state advances by the golden gamma,
    outputs are mix64 of the state."""

    def __init__(self, seed: int, *indices: int):
        self._state = derive_state(seed, *indices)

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix64(self._state)

    def next_float(self) -> float:
        # top 53 bits -> [0, 1)
        return (self.next_u64() >> 11) * 2.0**-53

    def next_below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        # largest multiple of bound below 2^64
        limit = _MASK + 1 - ((_MASK + 1) % bound)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % bound

    def floats(self, count: int) -> np.ndarray:
        """Vectorized batch of next_float values, bit-identical to
        calling next_float count times."""
        base = self._state
        self._state = (self._state + count * _GAMMA) & _MASK
        with np.errstate(over="ignore"):
            steps = np.arange(1, count + 1, dtype=np.uint64)
            x = np.uint64(base) + np.uint64(_GAMMA) * steps
            x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
            x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
            x = x ^ (x >> np.uint64(31))
        return (x >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def gaussians(self, count: int) -> np.ndarray:
        """Standard normal draws via Box-Muller on paired uniforms."""
        m = (count + 1) // 2
        u1 = self.floats(m)
        u2 = self.floats(m)
        # avoid log(0): shift into (0, 1]
        r = np.sqrt(-2.0 * np.log(1.0 - u1))
        theta = 2.0 * math.pi * u2
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def shuffle(self, arr: np.ndarray) -> None:
        """In-place Fisher-Yates."""
        n = len(arr)
        for t in range(n - 1):
            r = t + self.next_below(n - t)
            arr[t], arr[r] = arr[r], arr[t]

    def sample_sorted(self, n: int, k: int) -> np.ndarray:
        """k distinct indices from range(n), uniform without replacement,
        returned sorted ascending."""
        if not 0 < k <= n:
            raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
        pool = np.arange(n, dtype=np.int64)
        for t in range(k):
            r = t + self.next_below(n - t)
            pool[t], pool[r] = pool[r], pool[t]
        picked = pool[:k]
        picked.sort()
        return picked
