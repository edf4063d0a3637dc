"""Worker-count resolution and order-preserving task maps."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

_LOGGER = logging.getLogger(__name__)

ENV_THREADS = "LOCALMIX_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    """Explicit value, else $LOCALMIX_THREADS, else 1."""
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "")
        try:
            threads = int(raw) if raw else 1
        except ValueError:
            _LOGGER.warning("Ignoring non-integer %s=%r", ENV_THREADS, raw)
            threads = 1
    return max(1, threads)


def map_tasks(func: Callable[[T], R], tasks: Sequence[T], threads: int = 1) -> List[R]:
    """Apply ``func`` to every task; results come back in task order.

    ``func`` must be a module-level function when ``threads > 1``.
    """
    if threads <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    workers = min(threads, len(tasks))
    _LOGGER.debug("Mapping %d tasks over %d processes", len(tasks), workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, tasks))
