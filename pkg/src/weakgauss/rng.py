"""Counter-based random streams (generator id ``splitmix64-ctr/1``).

Every stream is identified by a 64-bit key. Draw ``j`` of a stream is a
pure function of ``(key, j)``, so a trial can be regenerated in isolation
and results never depend on execution order or thread count.

Definitions (all arithmetic modulo 2**64)::

    mix(z)        = splitmix64 finaliser
                    z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9
                    z = (z ^ z >> 27) * 0x94D049BB133111EB
                    z ^ z >> 31
    raw(key, j)   = mix(key + (j + 1) * GOLDEN)
    uniform(j)    = (raw(key, j) >> 11) * 2**-53               in [0, 1)
    normal(j)     = sqrt(-2 log(1 - uniform(2j))) * cos(2 pi uniform(2j + 1))

Keys are derived by folding indices into a seed::

    h = mix(seed + GOLDEN)
    for i, idx in enumerate(indices):
        h = mix(h ^ mix(idx + (i + 1) * GOLDEN))

The compiled kernel implements the same rules; changing any of them
changes every published number and requires bumping ``GENERATOR_ID``.
"""

from __future__ import annotations

import math

import numpy as np

GENERATOR_ID = "splitmix64-ctr/1"

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi

# scheme tags used as the last index of a trial key
WEAK_TAG = 0
PROJECTIVE_TAG = 1
# tag separating state-generation keys from trial keys
STATE_TAG = 0x5747


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_key(seed: int, *indices: int) -> int:
    h = mix64(seed + GOLDEN)
    for i, idx in enumerate(indices):
        h = mix64(h ^ mix64(idx + (i + 1) * GOLDEN))
    return h


def extend_key(key: int, position: int, *indices: int) -> int:
    """Continue :func:`derive_key` from a prefix key.

    ``position`` is the number of indices already folded into ``key``.
    """
    h = key
    for i, idx in enumerate(indices, start=position):
        h = mix64(h ^ mix64(idx + (i + 1) * GOLDEN))
    return h


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _as_u64(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x.astype(np.uint64, copy=False)
    if isinstance(x, int):
        return np.asarray(x & MASK64, dtype=np.uint64)
    return np.asarray([int(v) & MASK64 for v in x], dtype=np.uint64)


def raw_array(key, counters) -> np.ndarray:
    """Vectorised ``raw(key, j)``; ``key`` and ``counters`` broadcast."""
    k = _as_u64(key)
    j = _as_u64(counters)
    with np.errstate(over="ignore"):
        z = k + (j + np.uint64(1)) * np.uint64(GOLDEN)
        return _mix64_array(z)


def uniform_array(key, counters) -> np.ndarray:
    return (raw_array(key, counters) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def normal_array(key, counters) -> np.ndarray:
    j = _as_u64(counters)
    u1 = uniform_array(key, 2 * j)
    u2 = uniform_array(key, 2 * j + np.uint64(1))
    return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(_TWO_PI * u2)


def extend_key_array(key: int, position: int, *indices) -> np.ndarray:
    """Vectorised :func:`extend_key`; each index may be an array."""
    h = _as_u64(key)
    with np.errstate(over="ignore"):
        for i, idx in enumerate(indices, start=position):
            t = _as_u64(idx) + np.uint64(((i + 1) * GOLDEN) & MASK64)
            h = _mix64_array(h ^ _mix64_array(t))
    return h


class CounterStream:
    """Sequential view over one keyed stream.

    Mirrors the ``normal``/``uniform`` signature of :class:`numpy.random.Generator`
    so protocol code accepts either. Normal and uniform draws use separate
    counters; both start at 0.
    """

    def __init__(self, key: int):
        self.key = int(key) & MASK64
        self.normal_counter = 0
        self.uniform_counter = 0

    @classmethod
    def from_indices(cls, seed: int, *indices: int) -> "CounterStream":
        return cls(derive_key(seed, *indices))

    def _take(self, attr, size):
        start = getattr(self, attr)
        count = 1 if size is None else int(np.prod(size))
        setattr(self, attr, start + count)
        return np.arange(start, start + count, dtype=np.uint64)

    def standard_normal(self, size=None):
        z = normal_array(self.key, self._take("normal_counter", size))
        return float(z[0]) if size is None else z.reshape(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        z = self.standard_normal(size)
        return loc + scale * z

    def uniform(self, low=0.0, high=1.0, size=None):
        x = uniform_array(self.key, self._take("uniform_counter", size))
        x = low + (high - low) * x
        return float(x[0]) if size is None else x.reshape(size)
