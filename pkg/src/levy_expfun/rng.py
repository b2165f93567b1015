"""Counter-based random number streams.

All samplers draw from Philox (counter-based, 64-bit) generators so that runs
are reproducible bit-for-bit across platforms and across worker counts.
Substreams are derived as ``seed XOR index``; role indices below keep the
streams of independent factors disjoint within one logical run, and chunked
samplers advance the index per fixed-size chunk regardless of how many threads
execute the chunks.
"""

from __future__ import annotations

import numpy as np

# Fixed role offsets for independent factors inside one identity/run. Spaced
# far apart so chunk indices (role + chunk) never collide between roles.
STREAM_PRIMARY = 0
STREAM_SECONDARY = 1 << 20
STREAM_TERTIARY = 2 << 20
STREAM_PILOT = 3 << 20

# Chunk size for vectorized samplers. Part of the output contract: results are
# a pure function of (seed, model, scheme, n), never of the executor.
CHUNK = 16384


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for substream ``index`` of ``seed``."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) ^ np.uint64(index)))


def chunk_sizes(n: int, chunk: int = CHUNK) -> list[int]:
    """Split ``n`` draws into fixed-size chunks (last one ragged)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = [chunk] * (n // chunk)
    if n % chunk:
        out.append(n % chunk)
    return out
