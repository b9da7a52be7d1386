"""Seeded random sources and deterministic seed splitting.

Every stochastic routine in the package draws from a
``numpy.random.Generator`` constructed through :func:`make_rng`, so a
fixed seed reproduces the exact draw sequence. Parallel or nested work
derives independent child seeds with :func:`split_seed` instead of
sharing one generator.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator; equal seeds give bitwise-equal streams."""
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))


def split_seed(seed: int, index: int) -> int:
    """Derive a well-mixed 64-bit child seed from (seed, index).

    SplitMix64 finalizer over the shifted parent seed: deterministic,
    avalanching, and independent of Python's hash randomization.
    """
    x = (int(seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x
