"""Seeded random numbers with identical output on every platform.

The stdlib's random module would work, but its Mersenne Twister state is
awkward to fork deterministically per pipeline step.  We use splitmix64 to
expand seeds and xoshiro256** for the stream; both are tiny, well known and
specified exactly by their constants, so runs are reproducible bit-for-bit
anywhere.  All randomness in the package flows through this module.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


def derive_seed(seed: int, *parts: int) -> int:
    """Fold sub-stream identifiers into a base seed (splitmix64 chaining)."""
    s = seed & _MASK64
    for p in parts:
        s, out = _splitmix64((s ^ (p & _MASK64)) & _MASK64)
        s = out
    _, out = _splitmix64(s)
    return out


class Rng:
    """xoshiro256** generator, state seeded via splitmix64."""

    def __init__(self, seed: int):
        self.seed = seed
        s = seed & _MASK64
        state = []
        for _ in range(4):
            s, v = _splitmix64(s)
            state.append(v)
        self._s = state

    def next64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def randrange(self, n: int) -> int:
        """Unbiased draw in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("randrange with non-positive bound")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            v = self.next64()
            if v <= limit:
                return v % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def geometric(self, denom: int = 3, cap: int = 16) -> int:
        """Length with mean `denom` (geometric, success prob 1/denom), capped."""
        n = 1
        while n < cap and self.randrange(denom) != 0:
            n += 1
        return n

    def child(self, *parts: int) -> "Rng":
        """Independent sub-stream derived from this generator's seed."""
        return Rng(derive_seed(self.seed, *parts))
