"""Splittable seeding: one master seed fans out into independent named streams."""
from __future__ import annotations

import numpy as np

STREAMS = ("world", "goals", "net_init", "exploration", "replay")


def seed_everything(seed: int) -> dict:
    """Map each consumer in ``STREAMS`` to its own ``numpy.random.Generator``.

    Children are spawned from a ``SeedSequence``, so draws from one stream
    never shift another.
    """
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(child)) for name, child in zip(STREAMS, children)}
