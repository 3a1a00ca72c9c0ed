"""Deterministic replication harness.

Replications are cut into fixed chunks that depend only on the number of
replications, never on the worker count. Chunks run serially or on a process
pool and are concatenated in chunk order, so any worker count yields the same
bits.
"""
import asyncio
import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from asgiref.sync import async_to_sync

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 250


def chunk_bounds(reps, chunk_size=DEFAULT_CHUNK_SIZE):
    return [(start, min(start + chunk_size, reps)) for start in range(0, reps, chunk_size)]


async def _gather_chunks(task, chunks, workers):
    loop = asyncio.get_running_loop()
    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
        futures = [loop.run_in_executor(pool, task, start, stop) for start, stop in chunks]
        return await asyncio.gather(*futures)


def replicate(task, reps, workers=1, chunk_size=DEFAULT_CHUNK_SIZE):
    """Run ``task(start, stop)`` over ``range(reps)`` and stack the per-replication rows.

    ``task`` must be picklable (a module-level function or a partial of one)
    and return an array whose first axis has length ``stop - start``.
    """
    chunks = chunk_bounds(reps, chunk_size)
    if workers > 1 and len(chunks) > 1:
        logger.debug(f"Running {len(chunks)} chunks on {workers} workers")
        parts = async_to_sync(_gather_chunks)(task, chunks, min(workers, len(chunks)))
    else:
        parts = [task(start, stop) for start, stop in chunks]
    return np.concatenate(parts, axis=0)
