"""Deterministic, platform-independent pseudo-random numbers.

Generator: xoshiro256** (Blackman & Vigna) whose 256-bit state is filled by
four successive SplitMix64 outputs of the 64-bit seed.  Everything is defined
on unsigned 64-bit integers, so a given seed yields the same stream on every
platform.

SplitMix64 step (all arithmetic mod 2**64)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

xoshiro256** step, state (s0, s1, s2, s3)::

    result = rotl(s1 * 5, 7) * 9
    t = s1 << 17
    s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3
    s2 ^= t
    s3 = rotl(s3, 45)
    return result

Derived values:

* ``random()``: ``(next >> 11) * 2**-53``, a double in [0, 1).
* ``randbelow(n)``: rejection sampling on the top bits (unbiased).
* ``derive(seed, *keys)``: seed of an independent child stream, obtained by
  feeding ``seed`` and each key through SplitMix64 in turn.

Bulk draws (``random_array``) use a numba-compiled loop when numba is
importable and the identical pure-Python loop otherwise.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; return (new_state, output)."""
    state = (state + GOLDEN) & MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


def derive(seed: int, *keys: int) -> int:
    state = seed & MASK
    state, out = splitmix64(state)
    for key in keys:
        state, out = splitmix64(out ^ (key & MASK))
    return out


try:  # pragma: no cover - exercised implicitly when numba is present
    from numba import njit

    @njit(cache=True)
    def _fill_doubles(s, out):  # noqa: C901
        s0, s1, s2, s3 = s[0], s[1], s[2], s[3]
        for i in range(out.shape[0]):
            x = s1 * np.uint64(5)
            x = ((x << np.uint64(7)) | (x >> np.uint64(57))) * np.uint64(9)
            t = s1 << np.uint64(17)
            s2 ^= s0
            s3 ^= s1
            s1 ^= s2
            s0 ^= s3
            s2 ^= t
            s3 = (s3 << np.uint64(45)) | (s3 >> np.uint64(19))
            out[i] = np.float64(x >> np.uint64(11)) * 1.1102230246251565e-16
        s[0], s[1], s[2], s[3] = s0, s1, s2, s3

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


class Rng:
    """xoshiro256** stream seeded through SplitMix64."""

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.seed = seed
        state = seed
        words = []
        for _ in range(4):
            state, out = splitmix64(state)
            words.append(out)
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK, 7) * 9) & MASK
        t = (s1 << 17) & MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        k = n.bit_length()
        while True:
            r = self.next_u64() >> (64 - k)
            if r < n:
                return r

    def choice_index(self, n: int) -> int:
        return self.randbelow(n)

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def random_array(self, n: int, use_numba: bool | None = None) -> np.ndarray:
        """``n`` successive ``random()`` values as a float64 array."""
        out = np.empty(n, dtype=np.float64)
        if n == 0:
            return out
        if use_numba is None:
            use_numba = HAVE_NUMBA
        if use_numba:
            state = np.array(self._s, dtype=np.uint64)
            _fill_doubles(state, out)
            self._s = [int(v) for v in state]
        else:
            for i in range(n):
                out[i] = self.random()
        return out

    def spawn(self, *keys: int) -> "Rng":
        return Rng(derive(self.seed, *keys))
