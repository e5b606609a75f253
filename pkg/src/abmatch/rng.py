"""Deterministic random-stream derivation.

Every random draw in the toolkit flows from one integer seed through a
named substream, so adding a consumer never perturbs another's draws.
"""

import numpy as np


def substream(seed: int, name: str, *indices: int) -> np.random.Generator:
    """Return a generator for the (seed, name, *indices) substream.

    The same arguments always yield the same stream, on every platform.
    """
    entropy = [int(seed) & 0xFFFFFFFF, *name.encode("utf-8"),
               *(int(i) & 0xFFFFFFFF for i in indices)]
    return np.random.default_rng(np.random.SeedSequence(entropy))
