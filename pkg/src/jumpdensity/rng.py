"""Deterministic splittable random streams.

Each (seed, stream_id) pair names an independent xoshiro256++ stream whose
state is expanded from the pair by a splitmix64 chain. Replica r of a batch
always draws from stream (base_seed, r), so batch results are independent
of chunking, thread count, and completion order, and the compiled kernels
reproduce the pure-Python streams bit for bit (both implement exactly the
update below and draw in the same order: one uniform for each holding time,
one uniform for each jump target).

Uniform doubles are ``(x >> 11) * 2**-53`` in [0, 1); exponentials use the
inverse CDF ``-log1p(-u) / rate``.
"""

import math

_MASK = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xDA942042E4DD58B5
_DOUBLE_SCALE = 2.0 ** -53


def _splitmix64(x):
    """One splitmix64 step: returns (next_state, output)."""
    x = (x + _SPLITMIX_GAMMA) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def stream_state(seed, stream_id):
    """Initial xoshiro256++ state for the (seed, stream_id) pair."""
    x = (int(seed) & _MASK) ^ ((int(stream_id) * _STREAM_MULT) & _MASK)
    s = []
    for _ in range(4):
        x, out = _splitmix64(x)
        s.append(out)
    if not (s[0] | s[1] | s[2] | s[3]):
        s[0] = 1  # all-zero state is the lone fixed point
    return s


class XoshiroStream:
    """xoshiro256++ generator bound to one (seed, stream_id) pair."""

    __slots__ = ("s0", "s1", "s2", "s3", "seed", "stream_id")

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.s0, self.s1, self.s2, self.s3 = stream_state(seed, stream_id)

    def next_raw(self):
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        t = (s0 + s3) & _MASK
        result = (((t << 23) | (t >> 41)) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def next_double(self):
        """Uniform double in [0, 1)."""
        return (self.next_raw() >> 11) * _DOUBLE_SCALE

    def next_exponential(self, rate):
        """Exponential variate of the given rate via the inverse CDF."""
        return -math.log1p(-self.next_double()) / rate
