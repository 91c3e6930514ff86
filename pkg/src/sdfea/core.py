"""Bit strings, the random source contract, and combinatorics.

A bit string is a 1-D ``numpy.uint8`` array holding 0/1 values. Every random
draw in the package goes through :class:`RandomSource`, which hands out raw
64-bit words from a numpy bit generator and turns them into doubles, bounded
integers and bits with fixed arithmetic. The compiled kernel applies the
exact same conversions to the same underlying stream, which is what makes the
two backends produce identical runs.
"""
from __future__ import annotations

import hashlib
import math
from functools import lru_cache

import numpy as np
from scipy.stats import binom

BitString = np.ndarray

_MASK32 = 0xFFFFFFFF
_TWO_POW_32 = 1 << 32
_INV_2_53 = 1.0 / 9007199254740992.0


def derive_seed(master_seed: int, *identity) -> int:
    """Hash ``master_seed`` and a row identity into a 64-bit child seed."""
    text = "|".join([str(int(master_seed))] + [str(part) for part in identity])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RandomSource:
    """Deterministic random stream backed by numpy's PCG64DXSM.

    Only 64-bit raw draws are taken from the bit generator. Conversions:

    * ``random()``: ``(w >> 11) * 2**-53``
    * ``below(m)``: Lemire's multiply-shift on the high 32 bits, with rejection
    * ``bits(n)``: bit ``i`` is bit ``i % 64`` of word ``i // 64``
    """

    def __init__(self, seed: int):
        if seed < 0 or seed >= 1 << 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.bit_generator = np.random.PCG64DXSM(np.random.SeedSequence(self.seed))

    @classmethod
    def for_run(cls, master_seed: int, run_index: int) -> "RandomSource":
        return cls(derive_seed(master_seed, run_index))

    def next_u64(self) -> int:
        return int(self.bit_generator.random_raw())

    def raw(self, size: int) -> np.ndarray:
        return self.bit_generator.random_raw(size)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV_2_53

    def random_array(self, size: int) -> np.ndarray:
        return (self.raw(size) >> np.uint64(11)).astype(np.float64) * _INV_2_53

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)`` for ``1 <= m <= 2**32``."""
        prod = (self.next_u64() >> 32) * m
        low = prod & _MASK32
        if low < m:
            threshold = (_TWO_POW_32 - m) % m
            while low < threshold:
                prod = (self.next_u64() >> 32) * m
                low = prod & _MASK32
        return prod >> 32

    def bits(self, n: int) -> BitString:
        words = self.raw((n + 63) // 64)
        shifts = np.arange(64, dtype=np.uint64)
        unpacked = (words[:, None] >> shifts[None, :]) & np.uint64(1)
        return unpacked.reshape(-1)[:n].astype(np.uint8)


def ones_count(x: BitString) -> int:
    return int(np.count_nonzero(x))


def hamming_distance(x: BitString, y: BitString) -> int:
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
    return int(np.count_nonzero(x != y))


def complement(x: BitString) -> BitString:
    return (1 - x).astype(np.uint8)


def flip_positions(x: BitString, s: int, rng: RandomSource, perm: np.ndarray) -> None:
    """Flip ``s`` distinct uniform positions of ``x`` in place.

    Partial Fisher-Yates over the scratch permutation ``perm``; afterwards the
    flipped positions are ``perm[:s]``. ``perm`` may start as any permutation
    of ``range(n)`` and is left permuted for the next call.
    """
    n = x.shape[0]
    for i in range(s):
        j = i + rng.below(n - i)
        perm[i], perm[j] = perm[j], perm[i]
        x[perm[i]] ^= 1


def flip_random_bits(x: BitString, s: int, rng: RandomSource,
                     perm: np.ndarray | None = None) -> BitString:
    """Return a copy of ``x`` with exactly ``s`` uniformly chosen bits flipped."""
    n = x.shape[0]
    if s < 0 or s > n:
        raise ValueError(f"cannot flip {s} bits of a length-{n} string")
    if perm is None:
        perm = np.arange(n, dtype=np.int64)
    y = x.copy()
    flip_positions(y, s, rng, perm)
    return y


@lru_cache(maxsize=4096)
def binomial_cdf(n: int, p: float) -> np.ndarray:
    """CDF of Bin(n, p) on ``0..n``, forced monotone with a final entry of 1."""
    cdf = binom.cdf(np.arange(n + 1), n, p)
    cdf = np.maximum.accumulate(np.asarray(cdf, dtype=np.float64))
    cdf[-1] = 1.0
    cdf.flags.writeable = False
    return cdf


def sample_from_cdf(cdf: np.ndarray, v: float) -> int:
    """Smallest index ``i`` with ``cdf[i] > v``."""
    return min(int(np.searchsorted(cdf, v, side="right")), cdf.shape[0] - 1)


def standard_bit_mutation(x: BitString, p: float, rng: RandomSource,
                          perm: np.ndarray | None = None) -> BitString:
    """Flip every bit independently with probability ``p``.

    Drawn as K ~ Bin(n, p) followed by K distinct uniform positions, which
    has the same distribution as independent per-bit coins.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"mutation rate must lie in [0, 1], got {p}")
    n = x.shape[0]
    k = sample_from_cdf(binomial_cdf(n, float(p)), rng.random())
    return flip_random_bits(x, k, rng, perm)


def log_binomial(n: int, k: int) -> float:
    """Natural log of C(n, k)."""
    if k < 0 or k > n:
        raise ValueError(f"need 0 <= k <= n, got n={n}, k={k}")
    if n <= 20000:
        # exact big-integer coefficient; math.log is accurate for huge ints
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
