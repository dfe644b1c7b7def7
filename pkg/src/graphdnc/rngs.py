"""Deterministic random-number-generator derivation.

Every stochastic routine in this package derives its generator from an
integer entropy tuple via a counter-based bit generator (Philox). Two
calls with the same tuple always produce identical streams, and streams
derived from distinct tuples are statistically independent, so work can
be farmed out to any number of workers in any order without changing
results.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

Seed = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator]


def derive_rng(*entropy: int) -> np.random.Generator:
    """Build a generator keyed by an integer tuple, e.g. (master_seed, b).

    The tuple feeds numpy's SeedSequence as entropy words. Note that
    SeedSequence ignores trailing zero words ([1] and [1, 0] give the
    same stream), so call sites keep a fixed tuple length per role and
    distinguish roles by a word in a fixed position, never by length.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(entropy))))


def as_rng(seed: Seed) -> np.random.Generator:
    """Coerce an int, tuple of ints, SeedSequence, or Generator to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if isinstance(seed, (int, np.integer)):
        return derive_rng(int(seed))
    return derive_rng(*(int(s) for s in seed))
