"""Cooperative deadlines and level-parallel bottom-up evaluation."""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Mapping, Optional, TypeVar

from ..decomposition.annotate import AnnotatedDecomposition
from ..errors import SolverTimeoutError

logger = logging.getLogger(__name__)

R = TypeVar("R")


class Deadline:
    """Wall-clock budget checked cooperatively (never interrupts a running step)."""

    def __init__(self, seconds: Optional[float] = None):
        self.seconds = seconds
        self.expires = None if seconds is None else time.monotonic() + seconds

    def expired(self) -> bool:
        return self.expires is not None and time.monotonic() >= self.expires

    def check(self, where: str = "") -> None:
        if self.expired():
            suffix = f" at {where}" if where else ""
            raise SolverTimeoutError(f"time budget of {self.seconds}s exhausted{suffix}")


def run_bottom_up(
    decomp: AnnotatedDecomposition,
    step: Callable[[int, Mapping[int, R]], R],
    threads: int = 1,
    deadline: Optional[Deadline] = None,
) -> Dict[int, R]:
    """
    Evaluate ``step`` for every cluster, children before parents.

    Clusters of equal height never depend on each other, so each level may
    run on a thread pool. Results are keyed by cluster, so the outcome does
    not depend on the thread count.

    Args:
        decomp: annotated decomposition
        step: called as step(j, results) with the children's results available
        threads: worker count (1 runs inline)
        deadline: optional cooperative time budget

    Returns:
        Mapping cluster index -> step result
    """
    results: Dict[int, R] = {}
    deadline = deadline or Deadline()

    def run_one(j: int) -> R:
        deadline.check(f"cluster {j}")
        return step(j, results)

    levels = decomp.levels()
    if threads <= 1:
        for level in levels:
            for j in level:
                results[j] = run_one(j)
        return results

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for level in levels:
            outputs = list(pool.map(run_one, level))
            for j, out in zip(level, outputs):
                results[j] = out
    return results
