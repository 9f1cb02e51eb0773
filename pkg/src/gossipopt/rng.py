"""Deterministic 64-bit PRNG used for all synthetic data.

The generator is pinned algorithmically so that ports in other languages can
reproduce the exact streams:

* state seeding: four rounds of splitmix64 applied to the user seed;
* generation: xoshiro256** (Blackman/Vigna), one 64-bit word per call;
* uniforms: the top 53 bits, ``(word >> 11) * 2**-53`` in [0, 1);
* normals: Box-Muller on ``u1 = 1 - uniform()`` (so the log argument is in
  (0, 1]) and ``u2 = uniform()``; the cosine branch is returned first and the
  sine branch cached for the next call.

Uniforms and normals draw from the same word stream in call order.
"""

import math

_MASK = (1 << 64) - 1


def _splitmix64(state):
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


class Rng:
    """xoshiro256** stream seeded via splitmix64."""

    def __init__(self, seed):
        state = int(seed) & _MASK
        s = []
        for _ in range(4):
            state, word = _splitmix64(state)
            s.append(word)
        self._s = s
        self._spare_normal = None

    def next_word(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self):
        """Uniform double in [0, 1)."""
        return (self.next_word() >> 11) * 2.0**-53

    def normal(self):
        """Standard normal via Box-Muller, one value per call."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = r * math.sin(theta)
        return r * math.cos(theta)

    def normals(self, n):
        return [self.normal() for _ in range(n)]
