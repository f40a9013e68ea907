"""Deterministic random-stream derivation.

Every randomized routine in this package takes a 64-bit integer seed and
derives its generator through `rng_for`.  Sub-streams (replicates, bootstrap
draws, latent processes) are derived from the root seed plus an integer path,
so parallel workers can generate independent streams without coordination and
a fixed root seed reproduces every output bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["rng_for", "child_seeds"]


def rng_for(seed: int, *path: int) -> np.random.Generator:
    """Return the PCG64 generator for `seed` at an integer sub-stream path.

    The derivation rule is ``SeedSequence([seed, *path])``: the same
    (seed, path) pair always yields the same stream, and distinct paths
    yield statistically independent streams.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, path)]))


def child_seeds(seed: int, n: int) -> list[int]:
    """Derive `n` integer child seeds from a root seed (for worker dispatch)."""
    ss = np.random.SeedSequence([int(seed)])
    return [int(s) for s in ss.generate_state(n, dtype=np.uint64)]
