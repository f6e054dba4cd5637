"""Deterministic per-replication seed derivation.

Replication r of a Monte Carlo run gets its own RNG seeded with
``child_seed(root_seed, r)``, so replications can run in any order or in
parallel and still produce identical results.

The scheme is SplitMix64, fixed bit-exactly:

    state   = (root_seed mod 2^64)
    mixed   = splitmix64(state + 0x9E3779B97F4A7C15 * (r + 1) mod 2^64)

with splitmix64(z) defined as

    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9  mod 2^64
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB  mod 2^64
    return z XOR (z >> 31)
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    """One SplitMix64 finalization round of a 64-bit state."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def child_seed(root_seed: int, index: int) -> int:
    """Derive the 64-bit seed for replication ``index`` from ``root_seed``."""
    if index < 0:
        raise ValueError("replication index must be nonnegative")
    state = (root_seed + _GOLDEN * (index + 1)) & _MASK64
    return splitmix64(state)
