"""Seeded deterministic byte stream used everywhere randomness is needed.

SHA-256 in counter mode. Unlike ``random.Random``, the output is stable
across Python versions and platforms, which is what makes fixed-seed
chain stores byte-identical between runs.
"""

from __future__ import annotations

import hashlib


class DeterministicRng:
    """Pseudo-random stream fully determined by its seed."""

    def __init__(self, seed: bytes | str | int):
        if isinstance(seed, int):
            seed = seed.to_bytes((seed.bit_length() + 7) // 8 or 1, "big", signed=False)
        elif isinstance(seed, str):
            seed = seed.encode("utf-8")
        elif not isinstance(seed, (bytes, bytearray)):
            raise TypeError(f"unsupported seed type: {type(seed).__name__}")
        self._key = hashlib.sha256(bytes(seed)).digest()
        self._counter = 0
        self._buffer = b""

    def take_bytes(self, n: int) -> bytes:
        """Return the next n bytes of the stream."""
        while len(self._buffer) < n:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def randbits(self, k: int) -> int:
        """Uniform integer in [0, 2**k)."""
        if k <= 0:
            return 0
        nbytes = (k + 7) // 8
        value = int.from_bytes(self.take_bytes(nbytes), "big")
        return value >> (8 * nbytes - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        k = n.bit_length()
        while True:
            value = self.randbits(k)
            if value < n:
                return value

    def randrange(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi)."""
        if hi <= lo:
            raise ValueError("empty range")
        return lo + self.randbelow(hi - lo)

    def choice(self, seq):
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randbelow(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, seq, k: int) -> list:
        """k distinct elements, order randomised."""
        if k > len(seq):
            raise ValueError("sample larger than population")
        pool = list(seq)
        self.shuffle(pool)
        return pool[:k]

    def spawn(self, label: str | bytes) -> "DeterministicRng":
        """Independent child stream; same (seed, label) gives the same child."""
        if isinstance(label, str):
            label = label.encode("utf-8")
        return DeterministicRng(self._key + b"/" + label)
