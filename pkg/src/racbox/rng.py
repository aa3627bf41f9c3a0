"""Deterministic derivation of independent random substreams.

All stochastic code in this package draws from generators built here, so
that a single master seed pins down every experiment.  Substreams are
addressed by an integer path (episode index, node id, stream label, ...)
hashed into a ``SeedSequence`` spawn key; distinct paths give statistically
independent streams and no state is shared between workers.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream addressed by ``path`` under ``master_seed``."""
    key = tuple(int(p) for p in path)
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=key)
    return np.random.default_rng(seq)
