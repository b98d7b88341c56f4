"""Per-cluster bookkeeping sets for bottom-up propagation."""

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..config import DEFAULT_HEURISTIC
from ..core.network import Network, Query
from ..errors import DecompositionError
from .treedecomp import (
    Decomposition,
    binarize,
    build_decomposition,
    choose_root,
    moralize,
    treewidth,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnotatedDecomposition:
    """Binary decomposition plus the sets driving bottom-up evaluation.

    For cluster j with parent p:
      x_last[j]  variables of C_j absent from C_p (all of C_j at the root)
      x_proc[j]  variables whose CPT is multiplied in at j
      u_set[j]   separator variables whose CPT was already used in j's subtree
      v_set[j]   remaining separator variables (only conditioned on)
    """

    base: Decomposition
    x_last: Tuple[FrozenSet[int], ...]
    x_proc: Tuple[FrozenSet[int], ...]
    u_set: Tuple[FrozenSet[int], ...]
    v_set: Tuple[FrozenSet[int], ...]
    cardinalities: Tuple[int, ...]
    children: Tuple[Tuple[int, ...], ...]
    height: Tuple[int, ...]

    @property
    def size(self) -> int:
        return self.base.size

    @property
    def width(self) -> int:
        return treewidth(self.base)

    @property
    def clusters(self) -> Tuple[FrozenSet[int], ...]:
        return self.base.clusters

    @property
    def parent(self) -> Tuple[Optional[int], ...]:
        return self.base.parent

    def separator(self, j: int) -> FrozenSet[int]:
        return self.u_set[j] | self.v_set[j]

    def levels(self) -> List[List[int]]:
        """Clusters grouped by height, leaves first."""
        grouped: Dict[int, List[int]] = {}
        for j, h in enumerate(self.height):
            grouped.setdefault(h, []).append(j)
        return [grouped[h] for h in sorted(grouped)]

    def zsize(self, variables) -> int:
        size = 1
        for v in variables:
            size *= self.cardinalities[v]
        return size


def annotate(
    decomp: Decomposition, net: Network, root_choice: Optional[int] = None
) -> AnnotatedDecomposition:
    """
    Annotate a decomposition of ``net``'s moral graph.

    Each CPT goes to the top cluster of the family member whose top cluster
    lies deepest; that cluster contains the whole family.

    Args:
        decomp: decomposition of moralize(net)
        net: the network
        root_choice: cluster index to root at; None keeps the current root

    Raises:
        DecompositionError: decomposition not valid for the network
    """
    problems = decomp.check(moralize(net))
    if problems:
        raise DecompositionError("decomposition not valid for network: " + "; ".join(problems[:3]))
    if root_choice is not None and root_choice != decomp.root:
        if not 0 <= root_choice < decomp.size:
            raise DecompositionError(f"root cluster {root_choice} out of range")
        decomp = decomp.reroot(root_choice)
    if any(len(kids) > 2 for kids in decomp.children_map().values()):
        logger.debug("Binarizing decomposition before annotation")
        decomp = binarize(decomp)

    n_clusters = decomp.size
    x_last = []
    for j in range(n_clusters):
        p = decomp.parent[j]
        x_last.append(decomp.clusters[j] if p is None else decomp.clusters[j] - decomp.clusters[p])

    top: Dict[int, int] = {}
    for j, members in enumerate(x_last):
        for v in members:
            top[v] = j
    depth = decomp.depth()

    proc: List[set] = [set() for _ in range(n_clusters)]
    for i in range(net.n):
        family = net.family(i)
        home = max((top[v] for v in family), key=lambda j: (depth[j], j))
        if not set(family) <= decomp.clusters[home]:
            raise DecompositionError(f"family of {net.variables[i].name!r} not inside a single cluster")
        proc[home].add(i)

    kids = decomp.children_map()
    u_set: List[FrozenSet[int]] = [frozenset()] * n_clusters
    v_set: List[FrozenSet[int]] = [frozenset()] * n_clusters
    height = [0] * n_clusters
    for j in reversed(range(n_clusters)):
        sep = decomp.separator(j)
        seen = set(proc[j])
        for c in kids[j]:
            seen |= u_set[c]
            height[j] = max(height[j], height[c] + 1)
        u_set[j] = frozenset(seen & sep)
        v_set[j] = frozenset(sep - u_set[j])

    annotated = AnnotatedDecomposition(
        base=decomp,
        x_last=tuple(x_last),
        x_proc=tuple(frozenset(s) for s in proc),
        u_set=tuple(u_set),
        v_set=tuple(v_set),
        cardinalities=net.cardinalities,
        children=tuple(tuple(kids[j]) for j in range(n_clusters)),
        height=tuple(height),
    )
    logger.debug(f"Annotated {n_clusters} clusters, width {annotated.width}")
    return annotated


def cluster_weights(decomp: AnnotatedDecomposition) -> List[int]:
    """Subtree weight per cluster: its size plus the weights of its children.

    Reported only; no solver decision depends on it.
    """
    weights = [0] * decomp.size
    for j in reversed(range(decomp.size)):
        weights[j] = len(decomp.clusters[j]) + sum(weights[c] for c in decomp.children[j])
    return weights


def prepare_decomposition(
    net: Network,
    query: Optional[Query] = None,
    heuristic: str = DEFAULT_HEURISTIC,
    root: Optional[int] = None,
) -> AnnotatedDecomposition:
    """Moralize, decompose, root (near the MAP variables by default), binarize and annotate."""
    decomp = build_decomposition(moralize(net), heuristic)
    if root is None:
        root = choose_root(decomp, query.map_vars if query is not None else ())
    decomp = binarize(decomp.reroot(root))
    annotated = annotate(decomp, net)
    logger.info(
        f"Decomposition ready: {annotated.size} clusters, width {annotated.width} ({heuristic})"
    )
    return annotated
