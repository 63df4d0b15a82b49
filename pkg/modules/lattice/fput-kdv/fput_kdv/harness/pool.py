"""Ordered fan-out of independent experiment cells."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

_logger = logging.getLogger(__name__)

C = TypeVar("C")
R = TypeVar("R")


def resolve_workers(threads: int, cells: int) -> int:
    """Worker count for ``threads`` (0 means one per CPU), capped by the cell count."""
    if threads < 0:
        raise ValueError("threads must be nonnegative")
    wanted = threads or (os.cpu_count() or 1)
    return max(1, min(wanted, cells))


def run_cells(func: Callable[[C], R], cells: Sequence[C], threads: int = 1) -> List[R]:
    """Apply ``func`` to every cell and return results in cell order.

    ``func`` and the cells must be picklable when more than one worker is used.
    """
    workers = resolve_workers(threads, len(cells))
    _logger.info("Running %d cells on %d worker(s)", len(cells), workers)
    if workers == 1:
        return [func(cell) for cell in cells]
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, cells))
