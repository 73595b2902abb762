"""Seed derivation and portable random streams.

All randomness in the workbench flows from 64-bit seeds through two
mechanisms:

* numpy ``Generator(PCG64(seed))`` streams for map generation and any
  per-episode sampling, and
* stateless splitmix64 hashing for (a) deriving episode seeds from a base
  seed, and (b) per-tile search-reveal draws.

Episode seed derivation: ``derive_seed(base_seed, cell_index, run_index,
stream)``.  Every agent run against the same (base_seed, cell, run) triple
sees the same map and the same reveal draws, which makes pointwise
comparisons between agents meaningful.

Reveal draws are counter-based: the k-th search attempt against a hidden
tile at (x, y) draws ``reveal_roll(reveal_seed, x, y, k)``.  Because the
draw depends only on the tile and its attempt count -- not on how many
total actions the agent has taken -- searching a tile more times can only
reveal a superset of what fewer searches would have revealed.  The
searches-per-wall sweep is monotone by coupling instead of by luck.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# Stream tags for derive_seed.
STREAM_MAP = 0
STREAM_SIM = 1
STREAM_REVEAL = 2


def splitmix64(x: int) -> int:
    """One splitmix64 step; a high-quality 64-bit mixer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix(*values: int) -> int:
    """Hash a tuple of integers into one 64-bit value."""
    h = 0x8BADF00D5EEDC0DE
    for v in values:
        h = splitmix64((h ^ (v & MASK64)) & MASK64)
    return h


def derive_seed(base_seed: int, cell_index: int, run_index: int, stream: int) -> int:
    """Seed for one episode's map / sim / reveal stream."""
    return mix(base_seed, cell_index, run_index, stream)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def reveal_roll(reveal_seed: int, x: int, y: int, attempt: int) -> float:
    """Uniform [0,1) draw for the attempt-th search against tile (x, y)."""
    h = mix(reveal_seed, x, y, attempt)
    return (h >> 11) * (1.0 / (1 << 53))
