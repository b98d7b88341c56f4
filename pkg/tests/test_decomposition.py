"""Tests for moralization, heuristic decompositions, binarization and annotation."""

import networkx as nx
import numpy as np
import pytest

from bnmap.decomposition.annotate import annotate, cluster_weights, prepare_decomposition
from bnmap.decomposition.treedecomp import (
    Decomposition,
    EliminationHeuristic,
    binarize,
    build_decomposition,
    choose_root,
    dump_decomposition,
    moralize,
    treewidth,
    visible_map_groups,
)
from bnmap.errors import DecompositionError
from bnmap.gadgets.maxsat import Max2SatInstance, amplify, max2sat_to_naivebayes
from bnmap.gadgets.partition import PartitionInstance, partition_to_hmm, partition_to_polytree

from conftest import make_query


def random_tree_decomposition(rng, n_clusters, n_vars):
    """Random rooted tree of random clusters (valid for the graph it covers)."""
    clusters = [frozenset(int(v) for v in rng.choice(n_vars, size=3, replace=False))]
    parent = [None]
    for j in range(1, n_clusters):
        p = int(rng.integers(0, j))
        shared = int(rng.choice(sorted(clusters[p])))
        fresh = {int(v) for v in rng.choice(n_vars, size=2)}
        clusters.append(frozenset({shared} | fresh))
        parent.append(p)
    return Decomposition(tuple(clusters), tuple(parent))


class TestMoralGraph:
    """Test moralization."""

    def test_co_parents_married(self, sprinkler_net):
        """Test that parents of a common child are joined."""
        moral = moralize(sprinkler_net)
        s, r = sprinkler_net.index_of("S"), sprinkler_net.index_of("R")
        assert moral.has_edge(s, r)
        assert moral.number_of_edges() == 5

    def test_polytree_gadget_edges(self):
        """Test that each Y_{i-1} is married to X_i."""
        art = partition_to_polytree(PartitionInstance.from_values([1, 1]))
        moral = moralize(art.network)
        net = art.network
        for i in (1, 2):
            assert moral.has_edge(net.index_of(f"Y{i - 1}"), net.index_of(f"X{i}"))


class TestBuildDecomposition:
    """Test greedy elimination decompositions."""

    def test_chain_width_one(self, chain_net):
        """Test that a two-node chain has a single cluster of width one."""
        decomp = build_decomposition(moralize(chain_net))
        assert decomp.is_valid(moralize(chain_net))
        assert treewidth(decomp) == 1

    def test_sprinkler_valid(self, sprinkler_net):
        """Test validity and width on a graph with a loop."""
        graph = moralize(sprinkler_net)
        for heuristic in ("min-fill", "min-degree"):
            decomp = build_decomposition(graph, heuristic)
            assert decomp.check(graph) == []
            assert decomp.width == 2

    def test_disconnected_components_chained(self):
        """Test that components are joined through empty separators."""
        graph = nx.Graph()
        graph.add_nodes_from(range(4))
        graph.add_edges_from([(0, 1), (2, 3)])
        decomp = build_decomposition(graph)
        assert decomp.is_valid(graph)
        assert any(not decomp.separator(j) for j in range(1, decomp.size))

    def test_unknown_heuristic(self):
        """Test that an unsupported heuristic is rejected."""
        with pytest.raises(ValueError):
            EliminationHeuristic("max-card")

    def test_tie_break_lowest_id(self):
        """Test that equal scores eliminate the lowest id first."""
        graph = nx.path_graph(4)
        sequence = EliminationHeuristic("min-degree").eliminate(graph)
        assert sequence[0][0] == 0

    def test_random_graphs_valid(self):
        """Test validity on random graphs for both heuristics."""
        rng = np.random.default_rng(5)
        for trial in range(30):
            graph = nx.gnp_random_graph(12, 0.25, seed=int(rng.integers(1 << 30)))
            for heuristic in ("min-fill", "min-degree"):
                assert build_decomposition(graph, heuristic).is_valid(graph)


class TestBinarize:
    """Test the binary transformation."""

    def test_star_is_binarized(self):
        """Test that a root with five children gets at most two per cluster."""
        clusters = tuple(frozenset({0, k}) for k in range(1, 7))
        parent = (None, 0, 0, 0, 0, 0)
        decomp = Decomposition(clusters, parent)
        binary = binarize(decomp)
        assert max(len(c) for c in binary.children_map().values()) <= 2
        assert binary.width == decomp.width
        assert binary.size < 2 * decomp.size
        graph = nx.Graph([(0, k) for k in range(1, 7)])
        assert binary.is_valid(graph)

    def test_random_decompositions(self):
        """Test width preservation and size bound on random trees."""
        rng = np.random.default_rng(17)
        for _ in range(200):
            decomp = random_tree_decomposition(rng, int(rng.integers(1, 25)), 12)
            binary = binarize(decomp)
            assert max((len(c) for c in binary.children_map().values()), default=0) <= 2
            assert treewidth(binary) == treewidth(decomp)
            assert binary.size < 2 * max(decomp.size, 1)

    def test_binary_tree_untouched(self):
        """Test that an already binary tree is returned unchanged."""
        decomp = Decomposition((frozenset({0, 1}), frozenset({1, 2})), (None, 0))
        assert binarize(decomp) is decomp


class TestRooting:
    """Test rerooting and root choice."""

    def test_reroot_keeps_validity(self, sprinkler_net):
        """Test that every cluster can serve as the root."""
        graph = moralize(sprinkler_net)
        decomp = build_decomposition(graph)
        for j in range(decomp.size):
            rerooted = decomp.reroot(j)
            assert rerooted.is_valid(graph)
            assert rerooted.clusters[0] == decomp.clusters[j]

    def test_choose_root_holds_first_map_var(self, sprinkler_net):
        """Test that the root holds the lowest-id MAP variable."""
        decomp = build_decomposition(moralize(sprinkler_net))
        j = choose_root(decomp, [3, 2])
        assert 2 in decomp.clusters[j]

    def test_dump_format(self, chain_net):
        """Test the debug dump."""
        decomp = build_decomposition(moralize(chain_net))
        text = dump_decomposition(decomp, chain_net.names)
        assert text == "cluster 0: A B parent=-"


class TestAnnotate:
    """Test the annotation sets."""

    def test_each_cpt_processed_once(self, sprinkler_net):
        """Test that x_proc partitions the variables."""
        decomp = prepare_decomposition(sprinkler_net)
        seen = [v for s in decomp.x_proc for v in s]
        assert sorted(seen) == list(range(sprinkler_net.n))

    def test_x_last_partitions_variables(self, ternary_net):
        """Test that every variable is summed out exactly once."""
        decomp = prepare_decomposition(ternary_net)
        seen = [v for s in decomp.x_last for v in s]
        assert sorted(seen) == list(range(ternary_net.n))

    def test_families_inside_home_cluster(self, ternary_net):
        """Test that a processed CPT's family lies inside its cluster."""
        decomp = prepare_decomposition(ternary_net)
        for j, members in enumerate(decomp.x_proc):
            for i in members:
                assert set(ternary_net.family(i)) <= decomp.clusters[j]

    def test_u_and_v_split_separator(self, sprinkler_net):
        """Test that U and V are disjoint and cover the separator."""
        decomp = prepare_decomposition(sprinkler_net)
        for j in range(decomp.size):
            assert not decomp.u_set[j] & decomp.v_set[j]
            assert decomp.u_set[j] | decomp.v_set[j] == decomp.base.separator(j)

    def test_invalid_decomposition_rejected(self, sprinkler_net):
        """Test that a decomposition missing an edge is refused."""
        bad = Decomposition((frozenset({0, 1, 2}), frozenset({3})), (None, 0))
        with pytest.raises(DecompositionError):
            annotate(bad, sprinkler_net)

    def test_cluster_weights(self, chain_net):
        """Test subtree weights on a single cluster."""
        decomp = prepare_decomposition(chain_net)
        assert cluster_weights(decomp) == [2]

    def test_levels_children_first(self, sprinkler_net):
        """Test that every child sits on an earlier level than its parent."""
        decomp = prepare_decomposition(sprinkler_net)
        level_of = {j: k for k, level in enumerate(decomp.levels()) for j in level}
        for j in range(1, decomp.size):
            assert level_of[j] < level_of[decomp.parent[j]]


class TestGadgetWidths:
    """Test heuristic widths of the generated gadgets."""

    def test_polytree_gadget_width_two(self):
        """Test width 2 for the partition polytree."""
        for values in ([1, 1], [1, 2, 3], [2, 3, 4, 5]):
            art = partition_to_polytree(PartitionInstance.from_values(values))
            assert prepare_decomposition(art.network, art.query).width == 2

    def test_hmm_gadget_width_one(self):
        """Test width 1 for the HMM-shaped tree."""
        art = partition_to_hmm(PartitionInstance.from_values([2, 2, 3]))
        assert prepare_decomposition(art.network, art.query).width == 1

    def test_naive_bayes_width(self):
        """Test width 1 for the naive Bayes gadget and at most 2 once amplified."""
        inst = Max2SatInstance.from_clauses(3, [((1, True), (2, False)), ((2, True), (3, True))])
        art = max2sat_to_naivebayes(inst)
        assert prepare_decomposition(art.network, art.query).width == 1
        amplified = amplify(art, 3)
        assert prepare_decomposition(amplified.network, amplified.query).width <= 2


class TestVisibleMap:
    """Test the MAP visibility groups."""

    def test_evidence_cuts_paths(self):
        """Test that an unobserved path joins MAP variables and evidence breaks it."""
        from bnmap.core.network import NetworkBuilder

        b = NetworkBuilder()
        for name in ("A", "M", "B"):
            b.add_variable(name, 2)
        b.set_parents("M", ["A"])
        b.set_parents("B", ["M"])
        for name, rows in (("A", 1), ("M", 2), ("B", 2)):
            b.set_cpt(name, [[0.5, 0.5]] * rows)
        net = b.build("f64")
        assert visible_map_groups(net, make_query(net, ["A", "B"])) == [(0, 2)]
        assert visible_map_groups(net, make_query(net, ["A", "B"], {"M": 0})) == [(0,), (2,)]
