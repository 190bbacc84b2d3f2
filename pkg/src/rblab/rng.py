"""Deterministic random streams for generation and experiments.

Reproducibility contract: every random draw in this package comes from a
SplitMix64 stream whose 64-bit seed is derived as

    stream_seed = int.from_bytes(
        blake2b(f"{master}:{label}:{index}".encode(), digest_size=8).digest(),
        "big",
    )

Distinct (label, index) pairs give independent streams, so per-constraint
and per-trial work can run in any order, or in parallel, without changing
results. SplitMix64 is implemented inline rather than delegating to
``random`` or numpy so that generated artifacts stay byte-identical across
interpreter and library versions.
"""

import hashlib

_MASK64 = (1 << 64) - 1


def derive_seed(master: int, label: str, index: int) -> int:
    """Mix (master seed, stream label, stream index) into a substream seed."""
    payload = f"{master}:{label}:{index}".encode("ascii")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "big")


class SplitMix64:
    """SplitMix64 generator: tiny, fast enough at desk scale, version-stable."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound), rejection sampled to avoid modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def sample(self, population: int, k: int) -> set[int]:
        """Uniform k-subset of range(population), via Floyd's algorithm."""
        if not 0 <= k <= population:
            raise ValueError(f"cannot sample {k} items from {population}")
        chosen: set[int] = set()
        for j in range(population - k, population):
            t = self.below(j + 1)
            chosen.add(j if t in chosen else t)
        return chosen

    def permutation(self, size: int) -> tuple[int, ...]:
        """Uniform permutation of range(size), via Fisher-Yates."""
        items = list(range(size))
        for i in range(size - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return tuple(items)
