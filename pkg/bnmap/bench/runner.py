"""Benchmark suite execution: every solver on every generated instance."""

import logging
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from ..config import (
    CSV_COLUMNS,
    DEFAULT_APPROX_MODE,
    DEFAULT_EPSILON,
    DEFAULT_HEURISTIC,
    DEFAULT_TIMEOUT_SECONDS,
    EXTRA_RECORD_COLUMNS,
    normalize_mode,
)
from ..core.network import Network, Query
from ..decomposition.annotate import AnnotatedDecomposition, prepare_decomposition
from ..decomposition.treedecomp import visible_map_groups
from ..errors import BNMapError, SolverTimeoutError
from ..inference.fptas import solve_map_approx
from ..inference.map_exact import MapSolution, solve_map
from ..inference.oracle import brute_force_map, oracle_feasible
from ..inference.scheduler import Deadline
from .generator import SuiteSpec, gen_random_instance, search_space_log2

logger = logging.getLogger(__name__)

SOLVER_KINDS = ("exact", "approx", "oracle")


@dataclass(frozen=True)
class SolverSpec:
    """A solver configuration; ``label`` is how it appears in records."""

    kind: str
    epsilon: float = DEFAULT_EPSILON
    mode: str = DEFAULT_APPROX_MODE

    @property
    def label(self) -> str:
        if self.kind != "approx":
            return self.kind
        short = "mult" if self.mode == "multiplicative" else "add"
        return f"approx:{self.epsilon:g}:{short}"

    def run(
        self,
        net: Network,
        query: Query,
        decomp: AnnotatedDecomposition,
        threads: int,
        deadline: Deadline,
    ) -> MapSolution:
        if self.kind == "oracle":
            return brute_force_map(net, query, deadline)
        if self.kind == "approx":
            return solve_map_approx(net, query, decomp, self.epsilon, self.mode, threads, deadline)
        return solve_map(net, query, decomp, threads=threads, deadline=deadline)


def parse_solver(text: Union[str, SolverSpec]) -> SolverSpec:
    """``exact``, ``oracle`` or ``approx[:<eps>[:<mult|add>]]``."""
    if isinstance(text, SolverSpec):
        return text
    parts = text.strip().split(":")
    kind = parts[0].lower()
    if kind not in SOLVER_KINDS:
        raise ValueError(f"unknown solver {text!r} (expected exact, oracle or approx:<eps>:<mode>)")
    if kind != "approx":
        if len(parts) > 1:
            raise ValueError(f"solver {kind!r} takes no parameters")
        return SolverSpec(kind)
    epsilon = float(parts[1]) if len(parts) > 1 and parts[1] else DEFAULT_EPSILON
    mode = normalize_mode(parts[2]) if len(parts) > 2 else normalize_mode(DEFAULT_APPROX_MODE)
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return SolverSpec("approx", epsilon, mode)


@dataclass
class RunRecord:
    """One (instance, solver) outcome."""

    suite: str
    instance: str
    ss_log2: float
    solver: str
    status: str
    ms: Optional[float] = None
    value: Optional[float] = None
    avg_pareto: Optional[float] = None
    avg_dim: Optional[float] = None
    width: Optional[int] = None
    visible_map: Optional[int] = None
    message: str = ""

    def to_row(self) -> Dict[str, Any]:
        data = asdict(self)
        return {col: data[col] for col in CSV_COLUMNS + EXTRA_RECORD_COLUMNS}


def _run_one(
    spec: SolverSpec,
    net: Network,
    query: Query,
    decomp: AnnotatedDecomposition,
    base: Dict[str, Any],
    timeout: Optional[float],
    threads: int,
) -> RunRecord:
    if spec.kind == "oracle" and not oracle_feasible(net, query):
        return RunRecord(**base, solver=spec.label, status="skipped", message="beyond oracle guard")
    started = time.perf_counter()
    try:
        solution = spec.run(net, query, decomp, threads, Deadline(timeout))
    except SolverTimeoutError:
        ms = (time.perf_counter() - started) * 1000.0
        logger.warning(f"{base['instance']}: {spec.label} timed out after {ms:.0f} ms")
        return RunRecord(**base, solver=spec.label, status="timeout", ms=ms)
    except BNMapError as e:
        logger.error(f"{base['instance']}: {spec.label} failed: {e}")
        return RunRecord(**base, solver=spec.label, status="error", message=str(e))
    ms = (time.perf_counter() - started) * 1000.0
    pareto_based = spec.kind != "oracle"
    return RunRecord(
        **base,
        solver=spec.label,
        status="ok",
        ms=ms,
        value=float(solution.value),
        avg_pareto=solution.stats.get("avg_pareto") if pareto_based else None,
        avg_dim=solution.stats.get("avg_dim") if pareto_based else None,
    )


def run_suite(
    specs: Iterable[SuiteSpec],
    solvers: Sequence[Union[str, SolverSpec]],
    timeout: Optional[float] = DEFAULT_TIMEOUT_SECONDS,
    threads: int = 1,
    heuristic: str = DEFAULT_HEURISTIC,
) -> List[RunRecord]:
    """
    Generate every instance of every suite and run each solver on it.

    Timeouts and solver errors are recorded, never raised; the oracle is
    skipped on instances beyond its guards.

    Args:
        specs: suite descriptions
        solvers: solver strings or SolverSpec objects
        timeout: seconds per solver run (None for no limit)
        threads: worker threads per solve
        heuristic: elimination heuristic

    Returns:
        Records sorted by (suite, instance, solver order)
    """
    solver_specs = [parse_solver(s) for s in solvers]
    if not solver_specs:
        raise ValueError("at least one solver is required")
    records: List[RunRecord] = []
    for spec in specs:
        logger.info(f"Running suite {spec.name}: {spec.query_count} instances")
        for index in range(spec.query_count):
            net, query = gen_random_instance(spec, index)
            decomp = prepare_decomposition(net, query, heuristic)
            base = {
                "suite": spec.name,
                "instance": f"{spec.name}#{index:03d}",
                "ss_log2": search_space_log2(net, query),
                "width": decomp.width,
                "visible_map": max((len(g) for g in visible_map_groups(net, query)), default=0),
            }
            for solver in solver_specs:
                records.append(_run_one(solver, net, query, decomp, base, timeout, threads))
    statuses = {}
    for rec in records:
        statuses[rec.status] = statuses.get(rec.status, 0) + 1
    logger.info(f"Suite run finished: {len(records)} records {statuses}")
    return records
