"""Exact MAP by pareto-set propagation over an annotated decomposition."""

import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..core.network import Instantiation, Network, Query
from ..core.numeric import ProbValue
from ..decomposition.annotate import AnnotatedDecomposition
from ..errors import InvalidQueryError, ZeroProbabilityEvidenceError
from .belief import check_compatible
from .factors import Factor, multiply
from .pareto import Assignment, Candidate, ParetoSet, prune
from .scheduler import Deadline, run_bottom_up

logger = logging.getLogger(__name__)

Reducer = Callable[[ParetoSet, int], ParetoSet]


@dataclass
class MapSolution:
    """Best MAP assignment, its value p(x_map, e) and solver statistics."""

    assignment: Instantiation
    value: ProbValue
    stats: Dict[str, Any] = field(default_factory=dict)
    guarantee: Optional[Dict[str, Any]] = None

    def named_assignment(self, net: Network) -> Dict[str, int]:
        return {net.variables[v].name: s for v, s in sorted(self.assignment.items())}


def _states(variables: Sequence[int], cards: Sequence[int]) -> List[Assignment]:
    """All instantiations of ``variables`` in ascending lexicographic order."""
    ranges = [range(cards[v]) for v in variables]
    return [tuple(zip(variables, combo)) for combo in itertools.product(*ranges)]


def combine_cluster(
    j: int,
    children: Sequence[ParetoSet],
    net: Network,
    evidence: Mapping[int, int],
    decomp: AnnotatedDecomposition,
    map_vars: frozenset,
    pruning: bool = True,
    tie_safe: bool = True,
) -> ParetoSet:
    """
    Candidates of cluster j from its children's pareto sets.

    For every state of the separator MAP variables (the group key), every
    state of the MAP variables eliminated here, and every group-consistent
    combination of child candidates: multiply the local CPTs with the child
    vectors and sum out the non-MAP, non-evidence variables eliminated here.

    Args:
        j: cluster index
        children: pareto sets of j's children, in decomp.children[j] order
        net: network
        evidence: observed states
        decomp: annotated decomposition
        map_vars: queried MAP variable ids
        pruning: prune to frontiers (False keeps every candidate)
        tie_safe: frontier rule, see pareto.discards

    Returns:
        ParetoSet of cluster j
    """
    cards = decomp.cardinalities
    sep = decomp.separator(j)
    key_vars = sorted(v for v in sep if v in map_vars)
    last_map = sorted(v for v in decomp.x_last[j] if v in map_vars)
    summed = [v for v in decomp.x_last[j] if v not in map_vars and v not in evidence]
    out_scope = sorted(v for v in sep if v not in evidence and v not in map_vars)
    child_keys = [
        sorted(v for v in decomp.separator(c) if v in map_vars) for c in decomp.children[j]
    ]

    local = multiply(
        [Factor.from_cpt(net, i, evidence) for i in sorted(decomp.x_proc[j])], net.backend
    )

    candidates: List[Candidate] = []
    for key in _states(key_vars, cards):
        for last in _states(last_map, cards):
            fixed = dict(key)
            fixed.update(last)
            sliced = local.slice(fixed)
            pools = []
            for child_set, ckey_vars in zip(children, child_keys):
                ckey = tuple((v, fixed[v]) for v in ckey_vars)
                pools.append(child_set.group(ckey))
            for combo in itertools.product(*pools):
                vector = multiply([sliced] + [c.vector for c in combo], net.backend)
                vector = vector.sum_out(summed).expand(out_scope, cards)
                processed = dict(last)
                for c in combo:
                    processed.update(c.processed_map)
                candidates.append(Candidate(key, tuple(sorted(processed.items())), vector))

    if not pruning:
        return ParetoSet.unpruned(candidates)
    return prune(candidates, tie_safe)


class MapSolver:
    """Pareto-set MAP solver shared by the exact and the approximate modes."""

    def __init__(
        self,
        net: Network,
        decomp: AnnotatedDecomposition,
        pruning: bool = True,
        tie_safe: bool = True,
        reducer: Optional[Reducer] = None,
        threads: int = 1,
        deadline: Optional[Deadline] = None,
    ):
        check_compatible(net, decomp)
        self.net = net
        self.decomp = decomp
        self.pruning = pruning
        self.tie_safe = tie_safe
        self.reducer = reducer
        self.threads = threads
        self.deadline = deadline

    def propagate(self, query: Query) -> Dict[int, ParetoSet]:
        """Pareto set of every cluster, leaves first."""
        self._check_query(query)
        evidence = query.evidence_dict
        map_vars = frozenset(query.map_vars)
        decomp = self.decomp

        def step(j: int, done: Mapping[int, ParetoSet]) -> ParetoSet:
            children = [done[c] for c in decomp.children[j]]
            result = combine_cluster(
                j, children, self.net, evidence, decomp, map_vars, self.pruning, self.tie_safe
            )
            if self.reducer is not None:
                result = self.reducer(result, j)
            logger.debug(f"cluster {j}: {len(result)} candidates in {len(result.groups)} groups")
            return result

        return run_bottom_up(decomp, step, self.threads, self.deadline)

    def solve(self, query: Query) -> MapSolution:
        """
        Best MAP assignment for ``query``.

        Ties are broken towards the lexicographically smallest assignment
        (by variable id, then state index).

        Raises:
            ZeroProbabilityEvidenceError: every MAP assignment has probability zero
            SolverTimeoutError: the deadline expired
        """
        started = time.perf_counter()
        sets = self.propagate(query)
        root_set = sets[self.decomp.base.root]
        best: Optional[Candidate] = None
        for cand in root_set:
            value = cand.vector.item()
            if best is None:
                best = cand
                continue
            top = best.vector.item()
            if value > top or (value == top and cand.processed_map < best.processed_map):
                best = cand
        if best is None or not best.vector.item() > 0:
            raise ZeroProbabilityEvidenceError(
                "evidence has zero probability under all MAP assignments"
            )
        stats = pareto_statistics(sets, self.decomp)
        stats["elapsed"] = time.perf_counter() - started
        value = best.vector.item()
        if isinstance(value, np.floating):
            value = float(value)
        logger.info(
            f"MAP solved: value={float(value):.6g}, avg pareto {stats['avg_pareto']:.2f}, "
            f"avg dim {stats['avg_dim']:.2f}"
        )
        return MapSolution(dict(best.processed_map), value, stats)

    def _check_query(self, query: Query) -> None:
        n = self.net.n
        for v in list(query.map_vars) + list(query.evidence_dict):
            if not 0 <= v < n:
                raise InvalidQueryError(f"query variable {v} not in network")


def pareto_statistics(sets: Mapping[int, ParetoSet], decomp: AnnotatedDecomposition) -> Dict[str, Any]:
    """Per-cluster frontier sizes and vector dimensions plus their averages."""
    clusters = []
    group_sizes: List[int] = []
    for j in sorted(sets):
        pset = sets[j]
        clusters.append(
            {"cluster": j, "candidates": len(pset), "groups": len(pset.groups), "dim": pset.dim}
        )
        group_sizes.extend(len(g) for g in pset.groups.values())
    dims = [c["dim"] for c in clusters]
    return {
        "avg_pareto": sum(group_sizes) / len(group_sizes) if group_sizes else 0.0,
        "avg_dim": sum(dims) / len(dims) if dims else 0.0,
        "max_pareto": max(group_sizes, default=0),
        "clusters": decomp.size,
        "width": decomp.width,
        "per_cluster": clusters,
    }


def solve_map(
    net: Network,
    query: Query,
    decomp: AnnotatedDecomposition,
    pruning: bool = True,
    threads: int = 1,
    deadline: Optional[Deadline] = None,
) -> MapSolution:
    """Convenience function for exact MAP."""
    return MapSolver(net, decomp, pruning=pruning, threads=threads, deadline=deadline).solve(query)


def decide_map(
    net: Network, query: Query, decomp: AnnotatedDecomposition, threads: int = 1
) -> Tuple[bool, MapSolution]:
    """Decision-MAP: whether the best value exceeds ``query.threshold``."""
    if query.threshold is None:
        raise InvalidQueryError("query carries no threshold")
    solution = solve_map(net, query, decomp, threads=threads)
    return solution.value > query.threshold, solution
