"""Moralization, greedy-elimination tree decompositions, binarization and rooting."""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from ..config import DEFAULT_HEURISTIC, SUPPORTED_HEURISTICS
from ..core.network import Network, Query
from ..errors import DecompositionError

logger = logging.getLogger(__name__)


def moralize(net: Network) -> nx.Graph:
    """Undirected moral graph on nodes 0..n-1: DAG edges plus married co-parents."""
    graph = nx.Graph()
    graph.add_nodes_from(range(net.n))
    for child, ps in enumerate(net.parents):
        graph.add_edges_from((p, child) for p in ps)
        for a_idx, a in enumerate(ps):
            for b in ps[a_idx + 1:]:
                graph.add_edge(a, b)
    return graph


@dataclass(frozen=True)
class Decomposition:
    """Rooted tree of clusters, stored in topological order (root is cluster 0).

    ``parent[j]`` is the index of cluster j's parent, None for the root.
    """

    clusters: Tuple[FrozenSet[int], ...]
    parent: Tuple[Optional[int], ...]

    @property
    def size(self) -> int:
        return len(self.clusters)

    @property
    def root(self) -> int:
        return 0

    @property
    def order(self) -> Tuple[int, ...]:
        return tuple(range(self.size))

    @property
    def width(self) -> int:
        return treewidth(self)

    def children(self, j: int) -> List[int]:
        return [c for c, p in enumerate(self.parent) if p == j]

    def children_map(self) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {j: [] for j in range(self.size)}
        for c, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(c)
        return kids

    def separator(self, j: int) -> FrozenSet[int]:
        p = self.parent[j]
        return frozenset() if p is None else self.clusters[j] & self.clusters[p]

    def depth(self) -> List[int]:
        depth = [0] * self.size
        for j in range(1, self.size):
            depth[j] = depth[self.parent[j]] + 1  # type: ignore[index]
        return depth

    def check(self, graph: nx.Graph) -> List[str]:
        """Violations of the decomposition properties for ``graph`` (empty when valid).

        Checks: non-empty clusters, a single root with parents listed before
        children, every node covered, every edge inside a cluster, and the
        clusters holding each node forming a connected subtree.
        """
        problems: List[str] = []
        if self.size == 0:
            return ["decomposition has no clusters"]
        if self.parent[0] is not None:
            problems.append("cluster 0 is not the root")
        for j in range(1, self.size):
            p = self.parent[j]
            if p is None or not 0 <= p < j:
                problems.append(f"cluster {j}: parent {p} does not precede it")
        for j, cluster in enumerate(self.clusters):
            if not cluster:
                problems.append(f"cluster {j} is empty")

        covered = frozenset().union(*self.clusters)
        missing = set(graph.nodes) - covered
        if missing:
            problems.append(f"nodes not covered: {sorted(missing)}")
        for u, v in graph.edges:
            if not any(u in c and v in c for c in self.clusters):
                problems.append(f"edge ({u}, {v}) not inside any cluster")
        if problems:
            return problems

        for node in sorted(covered):
            tops = [
                j
                for j, c in enumerate(self.clusters)
                if node in c and (self.parent[j] is None or node not in self.clusters[self.parent[j]])
            ]
            if len(tops) != 1:
                problems.append(f"clusters containing {node} are not connected")
        return problems

    def is_valid(self, graph: nx.Graph) -> bool:
        return not self.check(graph)

    def reroot(self, new_root: int) -> "Decomposition":
        """Same tree re-hung from ``new_root`` (cluster indices are renumbered)."""
        if new_root == 0:
            return self
        adjacency = _adjacency(self.parent)
        return _from_adjacency(list(self.clusters), adjacency, new_root)


def _adjacency(parent: Sequence[Optional[int]]) -> Dict[int, List[int]]:
    adj: Dict[int, List[int]] = {j: [] for j in range(len(parent))}
    for c, p in enumerate(parent):
        if p is not None:
            adj[c].append(p)
            adj[p].append(c)
    return adj


def _from_adjacency(
    clusters: List[FrozenSet[int]], adjacency: Dict[int, List[int]], root: int
) -> Decomposition:
    """Breadth-first renumbering so that cluster 0 is the root and parents precede children."""
    index = {root: 0}
    order = [root]
    parents: List[Optional[int]] = [None]
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(adjacency[u]):
            if v not in index:
                index[v] = len(order)
                order.append(v)
                parents.append(index[u])
                queue.append(v)
    if len(order) != len(clusters):
        raise DecompositionError("cluster tree is not connected")
    return Decomposition(tuple(clusters[u] for u in order), tuple(parents))


class EliminationHeuristic:
    """Greedy elimination ordering with ties broken by lowest node id."""

    def __init__(self, heuristic: str = DEFAULT_HEURISTIC):
        if heuristic not in SUPPORTED_HEURISTICS:
            raise ValueError(f"unknown heuristic {heuristic!r} (expected one of {SUPPORTED_HEURISTICS})")
        self.heuristic = heuristic

    def score(self, graph: nx.Graph, v: int) -> int:
        if self.heuristic == "min-degree":
            return graph.degree(v)
        nbrs = list(graph.neighbors(v))
        fill = 0
        for i, a in enumerate(nbrs):
            for b in nbrs[i + 1:]:
                if not graph.has_edge(a, b):
                    fill += 1
        return fill

    def eliminate(self, graph: nx.Graph) -> List[Tuple[int, FrozenSet[int]]]:
        """Elimination sequence as (node, elimination clique) pairs."""
        work = graph.copy()
        sequence = []
        while work.number_of_nodes():
            v = min(work.nodes, key=lambda u: (self.score(work, u), u))
            nbrs = list(work.neighbors(v))
            for i, a in enumerate(nbrs):
                for b in nbrs[i + 1:]:
                    work.add_edge(a, b)
            work.remove_node(v)
            sequence.append((v, frozenset(nbrs) | {v}))
        return sequence


def build_decomposition(graph: nx.Graph, heuristic: str = DEFAULT_HEURISTIC) -> Decomposition:
    """
    Tree decomposition from a greedy elimination ordering.

    Each eliminated node contributes its elimination clique; a clique hangs
    below the clique of its earliest-eliminated remaining neighbour. Cliques
    contained in a tree neighbour are contracted, and the trees of separate
    components are chained through empty separators.

    Args:
        graph: undirected graph on nodes 0..n-1
        heuristic: 'min-fill' or 'min-degree'

    Returns:
        Decomposition rooted at the last-eliminated clique of the component
        that finishes elimination first
    """
    sequence = EliminationHeuristic(heuristic).eliminate(graph)
    if not sequence:
        raise DecompositionError("cannot decompose an empty graph")
    position = {v: k for k, (v, _) in enumerate(sequence)}
    clusters: Dict[int, FrozenSet[int]] = {}
    parent: Dict[int, Optional[int]] = {}
    for k, (v, clique) in enumerate(sequence):
        clusters[k] = clique
        later = [position[u] for u in clique if u != v]
        parent[k] = min(later) if later else None

    _contract(clusters, parent)

    # chain component roots in elimination order
    roots = sorted(k for k, p in parent.items() if p is None)
    for prev, nxt in zip(roots, roots[1:]):
        parent[nxt] = prev
    keys = sorted(clusters)
    local = {k: i for i, k in enumerate(keys)}
    adjacency: Dict[int, List[int]] = {i: [] for i in range(len(keys))}
    for k in keys:
        p = parent[k]
        if p is not None:
            adjacency[local[k]].append(local[p])
            adjacency[local[p]].append(local[k])
    decomp = _from_adjacency([clusters[k] for k in keys], adjacency, local[roots[0]])
    logger.debug(f"Built {heuristic} decomposition: {decomp.size} clusters, width {treewidth(decomp)}")
    return decomp


def _contract(clusters: Dict[int, FrozenSet[int]], parent: Dict[int, Optional[int]]) -> None:
    """Merge clusters that are subsets of their tree neighbour."""
    changed = True
    while changed:
        changed = False
        for k in sorted(clusters):
            p = parent[k]
            if p is None:
                continue
            if clusters[k] <= clusters[p]:
                victim, keeper = k, p
            elif clusters[p] <= clusters[k]:
                # the child absorbs its parent and takes its place in the tree
                clusters[p] = clusters[k]
                victim, keeper = k, p
            else:
                continue
            for c in clusters:
                if parent[c] == victim:
                    parent[c] = keeper
            del clusters[victim]
            del parent[victim]
            changed = True
            break


def binarize(decomp: Decomposition) -> Decomposition:
    """Limit every cluster to at most two children by chaining replicas.

    A cluster with k > 2 children keeps its first child and a replica of
    itself; each replica repeats that, the last one taking the final two
    children. Width is unchanged and cluster count stays below twice the
    original.
    """
    clusters = list(decomp.clusters)
    kids = decomp.children_map()
    adjacency: Dict[int, List[int]] = {j: [] for j in range(decomp.size)}

    def link(a: int, b: int) -> None:
        adjacency[a].append(b)
        adjacency[b].append(a)

    for j in range(decomp.size):
        children = kids[j]
        holder = j
        while len(children) > 2:
            link(holder, children[0])
            replica = len(clusters)
            clusters.append(decomp.clusters[j])
            adjacency[replica] = []
            link(holder, replica)
            holder = replica
            children = children[1:]
        for c in children:
            link(holder, c)
    if len(clusters) == decomp.size:
        return decomp
    return _from_adjacency(clusters, adjacency, 0)


def treewidth(decomp: Decomposition) -> int:
    """Largest cluster size minus one."""
    return max((len(c) for c in decomp.clusters), default=0) - 1


def choose_root(decomp: Decomposition, map_vars: Iterable[int]) -> int:
    """Cluster holding the lowest-id MAP variable (the current root when there is none)."""
    targets = sorted(map_vars)
    if not targets:
        return decomp.root
    first = targets[0]
    for j, cluster in enumerate(decomp.clusters):
        if first in cluster:
            return j
    raise DecompositionError(f"variable {first} is not in any cluster")


def dump_decomposition(decomp: Decomposition, names: Optional[Sequence[str]] = None) -> str:
    """Debug text, one ``cluster <id>: <vars> parent=<id>`` line per cluster."""
    lines = []
    for j, cluster in enumerate(decomp.clusters):
        members = [names[v] if names else str(v) for v in sorted(cluster)]
        parent = "-" if decomp.parent[j] is None else str(decomp.parent[j])
        lines.append(f"cluster {j}: {' '.join(members)} parent={parent}")
    return "\n".join(lines)


def visible_map_groups(net: Network, query: Query) -> List[Tuple[int, ...]]:
    """Partition the MAP variables by mutual visibility.

    Two MAP variables see each other when the moral graph without evidence
    joins them by a path whose inner nodes are all non-MAP. Singleton groups
    mean the MAP variables cut the graph.
    """
    moral = moralize(net)
    evidence = set(query.evidence_dict)
    map_set = set(query.map_vars)
    free = [v for v in range(net.n) if v not in evidence and v not in map_set]
    contracted = nx.Graph()
    contracted.add_nodes_from(("map", v) for v in map_set)
    for u, v in moral.edges:
        if u in map_set and v in map_set:
            contracted.add_edge(("map", u), ("map", v))
    for k, component in enumerate(nx.connected_components(moral.subgraph(free))):
        for node in component:
            for nbr in moral.neighbors(node):
                if nbr in map_set:
                    contracted.add_edge(("free", k), ("map", nbr))
    groups = []
    for component in nx.connected_components(contracted):
        members = tuple(sorted(v for kind, v in component if kind == "map"))
        if members:
            groups.append(members)
    return sorted(groups)
