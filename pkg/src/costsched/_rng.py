"""Deterministic seed derivation.

All stochastic components draw their seeds from a single master seed via a
splitmix-style integer mixer, so reruns with one seed are bit-reproducible
and independent components get decorrelated streams.
"""

MASK64 = (1 << 64) - 1

# namespacing tags so different derivation purposes never collide
TAG_TREE = 0x7265
TAG_PERM = 0x7065
TAG_SUBSET = 0x5355
TAG_MEMBER = 0x4D45
TAG_RUN = 0x5255


def mix64(x: int) -> int:
    x &= MASK64
    x ^= x >> 33
    x = (x * 0xFF51AFD7ED558CCD) & MASK64
    x ^= x >> 33
    x = (x * 0xC4CEB9FE1A85EC53) & MASK64
    x ^= x >> 33
    return x


def derive_seed(master: int, *tokens: int) -> int:
    """Fold `tokens` into `master` and return a well-mixed 64-bit seed."""
    x = mix64((master & MASK64) ^ 0x9E3779B97F4A7C15)
    for t in tokens:
        x = mix64(x ^ mix64(t & MASK64) ^ 0xD1B54A32D192ED03)
    return x


def subset_seed(master: int, variables) -> int:
    """Seed tied to a variable subset; identical for every caller that
    evaluates the same subset under the same master seed."""
    return derive_seed(master, TAG_SUBSET, *sorted(variables))
