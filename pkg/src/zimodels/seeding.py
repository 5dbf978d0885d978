"""Deterministic random-stream derivation.

Every randomized routine takes either a `numpy.random.Generator` or an
integer seed plus a structural path (replicate index, candidate index, ...).
Streams derived from the same (seed, path) are identical regardless of
execution order or thread count, which is what makes bootstrap reports
bit-reproducible under parallelism.
"""

from __future__ import annotations

import numpy as np

Seed = int | tuple


def substream(seed: Seed, *path: int) -> np.random.Generator:
    """Return the generator for `seed` refined by a structural path.

    `seed` may itself be a tuple `(root, k1, k2, ...)`, in which case the
    extra elements are prepended to `path`.
    """
    if isinstance(seed, tuple):
        root, prefix = seed[0], tuple(seed[1:])
    else:
        root, prefix = seed, ()
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(p) for p in prefix + path))
    return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng_or_seed) -> np.random.Generator:
    """Accept a Generator, an integer seed, or a (seed, path...) tuple."""
    if isinstance(rng_or_seed, np.random.Generator):
        return rng_or_seed
    return substream(rng_or_seed)
