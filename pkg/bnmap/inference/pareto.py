"""Pareto candidates, dominance and group-keyed frontier maintenance."""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from ..errors import IncomparableCandidatesError
from .factors import Factor

logger = logging.getLogger(__name__)

Assignment = Tuple[Tuple[int, int], ...]


@dataclass(frozen=True, eq=False)
class Candidate:
    """A propagated MAP message.

    group_key      states of the separator's MAP variables (fixed by this candidate)
    processed_map  states of the MAP variables summed out below, sorted by id
    vector         message over separator minus evidence minus group_key variables
    """

    group_key: Assignment
    processed_map: Assignment
    vector: Factor

    @property
    def dim(self) -> int:
        return self.vector.dim

    @property
    def flat(self) -> np.ndarray:
        return self.vector.flat

    def is_zero(self) -> bool:
        return not bool(np.any(self.flat > 0))

    def total(self):
        return self.flat.sum()


def dominates(a: Candidate, b: Candidate) -> bool:
    """True iff a >= b everywhere and a > b somewhere.

    Raises:
        IncomparableCandidatesError: different group keys or dimensions
    """
    if a.group_key != b.group_key or a.dim != b.dim:
        raise IncomparableCandidatesError(
            f"cannot compare candidates of group {a.group_key}/dim {a.dim} "
            f"and group {b.group_key}/dim {b.dim}"
        )
    fa, fb = a.flat, b.flat
    return bool(np.all(fa >= fb)) and bool(np.any(fa > fb))


def discards(a: Candidate, b: Candidate, tie_safe: bool = True) -> bool:
    """Whether frontier member ``a`` makes ``b`` redundant.

    Identical vectors keep the lexicographically smaller processed_map. In
    tie-safe mode a dominating vector only removes ``b`` when its
    processed_map is smaller or it is strictly larger in every coordinate,
    which keeps the tie-broken optimum reachable. Both relations are strict
    partial orders, so incremental insertion yields a unique frontier.
    """
    fa, fb = a.flat, b.flat
    if not bool(np.all(fa >= fb)):
        return False
    smaller_map = a.processed_map < b.processed_map
    if tie_safe:
        return smaller_map or bool(np.all(fa > fb))
    return smaller_map or bool(np.any(fa > fb))


class ParetoSet:
    """Candidates grouped by key; frontiers are only compared within a group."""

    def __init__(self, groups: Optional[Dict[Assignment, List[Candidate]]] = None):
        self.groups: Dict[Assignment, List[Candidate]] = groups if groups is not None else {}

    def __len__(self) -> int:
        return sum(len(g) for g in self.groups.values())

    def __iter__(self) -> Iterator[Candidate]:
        for key in self.groups:
            yield from self.groups[key]

    def group(self, key: Assignment) -> List[Candidate]:
        return self.groups.get(key, [])

    @property
    def dim(self) -> int:
        for cand in self:
            return cand.dim
        return 0

    @classmethod
    def unpruned(cls, candidates: Iterable[Candidate]) -> "ParetoSet":
        groups: Dict[Assignment, List[Candidate]] = {}
        for cand in candidates:
            groups.setdefault(cand.group_key, []).append(cand)
        return cls(groups)


def insert(frontier: List[Candidate], cand: Candidate, tie_safe: bool = True) -> bool:
    """Insert into a single group's frontier; returns False when ``cand`` is redundant."""
    for member in frontier:
        if discards(member, cand, tie_safe):
            return False
    frontier[:] = [m for m in frontier if not discards(cand, m, tie_safe)]
    frontier.append(cand)
    return True


def prune(candidates: Iterable[Candidate], tie_safe: bool = True) -> ParetoSet:
    """
    Reduce candidates to per-group frontiers.

    All-zero vectors are dropped unless nothing else is left in the group,
    in which case the one with the smallest processed_map stays.

    Args:
        candidates: candidates sharing a scope (any number of groups)
        tie_safe: see ``discards``; False keeps exactly the non-dominated ones

    Returns:
        ParetoSet with one frontier per group key
    """
    groups: Dict[Assignment, List[Candidate]] = {}
    zeros: Dict[Assignment, Candidate] = {}
    for cand in candidates:
        key = cand.group_key
        if cand.is_zero():
            best = zeros.get(key)
            if best is None or cand.processed_map < best.processed_map:
                zeros[key] = cand
            groups.setdefault(key, [])
            continue
        insert(groups.setdefault(key, []), cand, tie_safe)
    for key, frontier in groups.items():
        if not frontier:
            frontier.append(zeros[key])
    return ParetoSet(groups)
