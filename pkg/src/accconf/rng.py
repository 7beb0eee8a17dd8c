"""Seeded, hash-based deterministic random stream.

``DeterministicRNG`` is a drop-in :class:`random.Random` whose bits come from
SHA-256 in counter mode, so a given seed yields the same stream on every
platform and Python version. Named substreams (``rng.spawn("shares")``)
let independent components draw without perturbing each other.
"""

import hashlib
import random
import struct


def _seed_bytes(seed):
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, str):
        return seed.encode()
    seed = int(seed)
    return seed.to_bytes(max(8, (seed.bit_length() + 8) // 8), "big", signed=True)


class DeterministicRNG(random.Random):
    def __new__(cls, *args, **kwargs):
        return super().__new__(cls)

    def __init__(self, seed=0, label=""):
        self._key = hashlib.sha256(b"accconf-rng\x00" + _seed_bytes(seed) + b"\x00" + label.encode()).digest()
        self._counter = 0
        self._pool = 0
        self._pool_bits = 0
        super().__init__()

    def seed(self, *args, **kwargs):
        # state lives in _key/_counter; the MT seeding of the base class is unused
        pass

    def getstate(self):
        return (self._key, self._counter, self._pool, self._pool_bits)

    def setstate(self, state):
        self._key, self._counter, self._pool, self._pool_bits = state

    def _refill(self):
        block = hashlib.sha256(self._key + struct.pack(">Q", self._counter)).digest()
        self._counter += 1
        self._pool = (self._pool << 256) | int.from_bytes(block, "big")
        self._pool_bits += 256

    def getrandbits(self, k):
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        while self._pool_bits < k:
            self._refill()
        self._pool_bits -= k
        out = self._pool >> self._pool_bits
        self._pool &= (1 << self._pool_bits) - 1
        return out

    def random(self):
        return self.getrandbits(53) * (1.0 / (1 << 53))

    def randbytes(self, n):
        return self.getrandbits(8 * n).to_bytes(n, "big") if n else b""

    def spawn(self, label):
        """Independent child stream keyed by this stream's seed and ``label``."""
        return DeterministicRNG(self._key, label)
