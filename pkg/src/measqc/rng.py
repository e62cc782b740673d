"""Seeded, splittable random streams.

Every random draw in the package comes from an explicitly passed
:class:`numpy.random.Generator`.  Shot loops give each shot its own child
stream, so a shot's outcomes depend only on the parent seed and the shot
index, never on how shots are batched or scheduled.
"""

import numpy as np


def make_rng(seed=None):
    """Generator from an int seed, or pass an existing Generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def shot_streams(rng, shots):
    """``shots`` independent child generators of ``rng`` (an int seed or Generator)."""
    return make_rng(rng).spawn(shots)
