"""Bounded fan-out with input-order results and failure accounting."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

from .errors import ExcessiveFailures

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_FAILURE_LIMIT = 0.01

logger = logging.getLogger(__name__)


def map_ordered(
    fn: Callable[[T], R], items: Sequence[T], parallelism: int = 1
) -> list[R | Exception]:
    """Apply ``fn`` to every item. Exceptions are returned in place of
    results so callers can account for per-item failures."""

    def call(item):
        try:
            return fn(item)
        except Exception as exc:  # noqa: BLE001
            return exc

    if parallelism <= 1 or len(items) <= 1:
        return [call(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(call, items))


def check_failures(stage: str, failed: int, total: int, limit: float = DEFAULT_FAILURE_LIMIT) -> None:
    if total and failed / total > limit:
        raise ExcessiveFailures(stage, failed, total, limit)
    if failed:
        logger.warning("%s: %d/%d items failed (within limit %g)", stage, failed, total, limit)
