"""Parameter sweeps fanned out over worker processes.

Rows are merged in sorted order, so the output never depends on scheduling.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.dynamics.rotation import (
    Plateau,
    PlateauSweep,
    build_sweep,
    numerators_by_denominator,
    plateaus_with_denominator,
)
from circlemap_elections.elections.two_party import StaircaseRow, staircase_cell

logger = logging.getLogger(__name__)

CHUNK_SIZE = 64


def _map[TIn, TOut](
    worker: Callable[[TIn], TOut], items: Sequence[TIn], jobs: int
) -> list[TOut]:
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1 (got {jobs})")
    if jobs == 1 or len(items) <= 1:
        return [worker(item) for item in items]
    logger.info("running %d task(s) on %d worker process(es)", len(items), jobs)
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(worker, items, chunksize=CHUNK_SIZE))


def _plateau_group(task: tuple[float, int, list[int]]) -> list[Plateau]:
    a, q, numerators = task
    return plateaus_with_denominator(a, q, numerators)


def sweep_plateaus(a: float, q_max: int, *, jobs: int = 1) -> PlateauSweep:
    """Every plateau with q <= q_max; one task per denominator."""

    if q_max < 1:
        raise ValidationError(f"q-max must be >= 1 (got {q_max})")
    if not 0.0 < a < 1.0:
        raise ValidationError(f"a must satisfy 0 < a < 1 (got {a})")
    groups = numerators_by_denominator(q_max)
    tasks = [(a, q, numerators) for q, numerators in sorted(groups.items())]
    return build_sweep(a, q_max, _map(_plateau_group, tasks, jobs))


def _staircase_task(
    point: tuple[float, float], *, q_max: int, tol: float
) -> StaircaseRow:
    alpha, beta = point
    return staircase_cell(alpha, beta, q_max=q_max, tol=tol)


def sweep_staircase(
    points: Iterable[tuple[float, float]],
    *,
    jobs: int = 1,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> list[StaircaseRow]:
    """pB per (α, β) grid cell, sorted by (α, β)."""

    worker = partial(_staircase_task, q_max=q_max, tol=tol)
    rows = _map(worker, list(points), jobs)
    return sorted(rows, key=lambda row: (row.alpha, row.beta))
