"""
Monte Carlo plumbing for the laboratory.
Seed derivation, counter-based random streams and the path-parallel worker pool.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

from .settings import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Stream tags appended after the segment index.
BRIDGE_STREAM = 1
AUXILIARY_STREAM = 2

DEFAULT_CHUNK = 256


def derive_seed(master_seed: int, index: int) -> int:
    """
    Seed of path `index` under `master_seed`.

    Args:
        master_seed: Experiment-level seed
        index: Path index

    Returns:
        64-bit integer seed, independent of any scheduling order
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def path_seeds(master_seed: int, n: int, offset: int = 0) -> List[int]:
    """Seeds of paths offset .. offset + n - 1."""
    return [derive_seed(master_seed, offset + i) for i in range(n)]


def path_stream(seed: int, *tags: int) -> np.random.Generator:
    """Philox stream keyed by a path seed and optional tags (segment index, purpose)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(tags))))


def chunk_ranges(n: int, chunk_size: int = DEFAULT_CHUNK) -> List[range]:
    """Split 0..n-1 into contiguous index ranges."""
    return [range(lo, min(lo + chunk_size, n)) for lo in range(0, n, chunk_size)]


def map_chunks(
    fn: Callable[[range], Sequence[T]],
    n: int,
    workers: Optional[int] = None,
    chunk_size: int = DEFAULT_CHUNK
) -> List[T]:
    """
    Apply `fn` to contiguous chunks of 0..n-1 on a thread pool.

    Results are concatenated in index order, so the output never depends on
    how the chunks were scheduled.

    Args:
        fn: Maps a range of indices to one result per index
        n: Number of indices
        workers: Thread count, THREADS setting when omitted
        chunk_size: Indices per task

    Returns:
        Flat list of per-index results
    """
    if n <= 0:
        return []
    chunks = chunk_ranges(n, chunk_size)
    workers = workers or get_settings().threads
    if workers <= 1 or len(chunks) == 1:
        parts = [fn(chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(chunks))) as pool:
            parts = list(pool.map(fn, chunks))
    results: List[T] = []
    for part in parts:
        results.extend(part)
    logger.debug(f"map_chunks: {n} items in {len(chunks)} chunks")
    return results
