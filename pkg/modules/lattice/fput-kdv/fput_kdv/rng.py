"""Seeded random streams.

Every random draw in the package comes from a Philox counter-based generator keyed by
``(seed, *key)`` through ``SeedSequence.spawn_key``. Ensemble member ``r`` always uses keys
starting with ``r``, so its draws do not depend on how many members run or in which order.

Stream keys in use:

- ``(r, NOISE_STREAM, side)``: the noise sequence zeta of realization ``r``.
- ``(r, MASS_STREAM, side)``: i.i.d. masses of realization ``r``.
- ``(r, DRIVER_STREAM)``: AR(1) drivers of realization ``r``.

``side`` is 0 for indices ``j >= 0`` (drawn outwards from 0) and 1 for ``j < 0``. A window of
half-width ``M`` is therefore a prefix of every wider window of the same realization.
"""

from typing import Tuple

import numpy as np
import numpy.typing as npt

NOISE_STREAM = 0
MASS_STREAM = 1
DRIVER_STREAM = 2

_UINT64_MAX = 2**64 - 1


def generator(seed: int, *key: int) -> np.random.Generator:
    """Return the Philox stream for ``(seed, *key)``."""
    if not 0 <= seed <= _UINT64_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def symmetric_uniform(
    seed: int, key: Tuple[int, ...], half_width: int, low: float, high: float
) -> npt.NDArray[np.float64]:
    """Draw i.i.d. uniform values on the index window ``[-half_width, half_width]``.

    Args:
        seed: Base seed.
        key: Stream key prefix (realization and stream id).
        half_width: Window half-width ``M``.
        low: Lower end of the uniform range.
        high: Upper end of the uniform range.

    Returns:
        Array of length ``2 * half_width + 1`` ordered by increasing index.
    """
    right = generator(seed, *key, 0).uniform(low, high, size=half_width + 1)
    left = generator(seed, *key, 1).uniform(low, high, size=half_width)
    return np.concatenate([left[::-1], right])
