"""Brute-force reference answers by full enumeration."""

import itertools
import logging
import time
from typing import Dict, Mapping, Optional, Tuple

from ..config import ORACLE_DEADLINE_CHECK_EVERY, ORACLE_MAX_FREE_STATES, ORACLE_MAX_MAP_STATES
from ..core.network import Network, Query, joint_probability, make_instantiation, state_space_size
from ..core.numeric import ProbValue
from ..errors import OracleGuardError, ZeroProbabilityEvidenceError
from .map_exact import MapSolution
from .scheduler import Deadline

logger = logging.getLogger(__name__)


def brute_force_joint(
    net: Network, target: Mapping[int, int], deadline: Optional[Deadline] = None
) -> ProbValue:
    """
    Sum of the joint probability over every completion of ``target``.

    Raises:
        OracleGuardError: more than 2^24 completions
    """
    fixed = make_instantiation(net, target)
    free = [v for v in range(net.n) if v not in fixed]
    size = state_space_size(net, free)
    if size > ORACLE_MAX_FREE_STATES:
        raise OracleGuardError(f"{size} completions exceed the oracle guard of {ORACLE_MAX_FREE_STATES}")
    deadline = deadline or Deadline()
    total = net.backend.zero
    full = dict(fixed)
    for count, states in enumerate(itertools.product(*(range(net.variables[v].cardinality) for v in free))):
        if count % ORACLE_DEADLINE_CHECK_EVERY == 0:
            deadline.check("oracle enumeration")
        full.update(zip(free, states))
        total = total + joint_probability(net, full)
    return total


def brute_force_map(
    net: Network, query: Query, deadline: Optional[Deadline] = None
) -> MapSolution:
    """
    Evaluate p(x_map, e) for every MAP assignment; ties go to the
    lexicographically smallest assignment.

    Raises:
        OracleGuardError: more than 2^20 MAP assignments (or too many completions)
        ZeroProbabilityEvidenceError: every assignment has probability zero
    """
    started = time.perf_counter()
    map_vars = list(query.map_vars)
    size = state_space_size(net, map_vars)
    if size > ORACLE_MAX_MAP_STATES:
        raise OracleGuardError(f"{size} MAP assignments exceed the oracle guard of {ORACLE_MAX_MAP_STATES}")
    evidence = query.evidence_dict
    free = [v for v in range(net.n) if v not in evidence and v not in query.map_vars]
    free_size = state_space_size(net, free)
    if free_size > ORACLE_MAX_FREE_STATES:
        raise OracleGuardError(f"{free_size} completions exceed the oracle guard of {ORACLE_MAX_FREE_STATES}")
    deadline = deadline or Deadline()

    # one pass over every joint configuration, totals keyed by MAP states
    totals: Dict[Tuple[int, ...], ProbValue] = {}
    full = dict(evidence)
    ranges = [range(net.variables[v].cardinality) for v in map_vars + free]
    k = len(map_vars)
    for count, states in enumerate(itertools.product(*ranges)):
        if count % ORACLE_DEADLINE_CHECK_EVERY == 0:
            deadline.check("oracle enumeration")
        full.update(zip(map_vars + free, states))
        key = states[:k]
        totals[key] = totals.get(key, net.backend.zero) + joint_probability(net, full)

    best_value: Optional[ProbValue] = None
    best_states = None
    for states in sorted(totals):
        if best_value is None or totals[states] > best_value:
            best_value, best_states = totals[states], states
    if best_value is None or not best_value > 0:
        raise ZeroProbabilityEvidenceError("evidence has zero probability under all MAP assignments")
    logger.debug(f"Oracle enumerated {size} MAP assignments")
    return MapSolution(
        dict(zip(map_vars, best_states)),
        best_value,
        {"avg_pareto": None, "avg_dim": None, "elapsed": time.perf_counter() - started},
    )


def oracle_feasible(net: Network, query: Query) -> bool:
    """Whether brute_force_map stays within both guards for ``query``."""
    map_size = state_space_size(net, query.map_vars)
    rest = [v for v in range(net.n) if v not in query.map_vars and v not in query.evidence_dict]
    return map_size <= ORACLE_MAX_MAP_STATES and state_space_size(net, rest) <= ORACLE_MAX_FREE_STATES
