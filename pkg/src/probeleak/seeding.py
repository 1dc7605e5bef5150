"""Deterministic seed derivation.

All randomness in this package flows through numpy's PCG64 bit generator,
seeded with 64-bit integers derived by the SplitMix64 finalizer below.
The derivation chain is part of the reproducibility contract: identical
master seeds and indices give identical streams on every platform.
"""

_MASK = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer: one full avalanche round on a 64-bit state."""
    x = (x + _GAMMA) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Mix a master seed with any number of integer indices.

    The chain is order-sensitive: derive_seed(s, 1, 0) != derive_seed(s, 0, 1).
    """
    h = splitmix64(master & _MASK)
    for idx in indices:
        h = splitmix64(h ^ (idx & _MASK))
    return h
