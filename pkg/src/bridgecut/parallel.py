"""Replicate-parallel map with per-replicate random streams.

Replicate i always uses ``RngStream(root_seed, offset + i)``, so results do
not depend on the number of workers or on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

from .errors import ParameterError
from .randkit.rng import RngStream

ENV_THREADS = "BRIDGECUT_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        raw = os.environ.get(ENV_THREADS, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ParameterError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ParameterError(f"thread count must be positive, got {threads}")
    return threads


def replicate_map(fn: Callable, n: int, root_seed: int, threads: int | None = None,
                  offset: int = 0, chunk: int = 64) -> list:
    """[fn(generator_i) for i in range(n)] with replicate i seeded by stream offset + i."""
    workers = resolve_threads(threads)

    def run(start):
        return [fn(RngStream(root_seed, offset + i).generator) for i in range(start, min(start + chunk, n))]

    starts = range(0, n, chunk)
    if workers == 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, starts))
    return [r for part in parts for r in part]
