"""Counter-based pseudo-randomness.

Every random draw in the package is a pure function of (seed, stream tag,
counter a, counter b).  This keeps all randomized algorithms replayable
across thread counts and backends: the compiled core implements the same
mixing function bit-for-bit.
"""

MASK64 = (1 << 64) - 1

# Stream tags.  Each randomized consumer draws from its own stream so the
# same (seed, counter) pair never collides across algorithms.
TAG_SHUFFLE_H = 0x1
TAG_MERGE_COIN = 0x2
TAG_MERGE_PRECOIN = 0x3
TAG_GRAPH_CENTER = 0x4
TAG_GRAPH_COIN = 0x5
TAG_ENCODER = 0x6
TAG_GEN = 0x7

_GOLD1 = 0x9E3779B97F4A7C15
_GOLD2 = 0xBF58476D1CE4E5B9
_GOLD3 = 0x94D049BB133111EB


def mix64(seed: int, tag: int, a: int, b: int = 0) -> int:
    """64-bit mixing of (seed, tag, a, b), splitmix-style finalizer."""
    z = (seed ^ (tag * _GOLD3) ^ (a * _GOLD1) ^ (b * _GOLD2)) & MASK64
    z = (z + _GOLD1) & MASK64
    z = ((z ^ (z >> 30)) * _GOLD2) & MASK64
    z = ((z ^ (z >> 27)) * _GOLD3) & MASK64
    return z ^ (z >> 31)


def bounded(seed: int, tag: int, a: int, b: int, n: int) -> int:
    """Uniform draw from {0, ..., n-1}.

    Uses 64-bit modulo reduction; the bias is at most n / 2**64, far below
    anything the statistical tests can resolve.
    """
    return mix64(seed, tag, a, b) % n


def coin(seed: int, tag: int, a: int, b: int = 0) -> int:
    """Fair coin in {0, 1}."""
    return mix64(seed, tag, a, b) & 1


def shuffle_target(seed: int, i: int) -> int:
    """The shuffle's swap target H[i], uniform in {0, ..., i} (0-based)."""
    return bounded(seed, TAG_SHUFFLE_H, i, 0, i + 1)
