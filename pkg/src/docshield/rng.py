"""Seeded shuffling shared by corpus splitting and cross-validation.

The shuffle procedure is part of the determinism contract, so it is spelled
out here rather than delegated to an opaque library call: a descending
Fisher-Yates pass where the swap partner for position ``i`` is drawn as
``rng.randint(0, i + 1)`` from a ``numpy.random.RandomState``. Tests replay
this exact procedure independently.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def new_rng(seed: int) -> np.random.RandomState:
    return np.random.RandomState(seed)


def fisher_yates(items: Sequence[T], rng: np.random.RandomState) -> list[T]:
    """Return a shuffled copy of ``items`` using the documented procedure."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = int(rng.randint(0, i + 1))
        out[i], out[j] = out[j], out[i]
    return out
