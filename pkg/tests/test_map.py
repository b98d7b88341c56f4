"""Tests for pareto pruning, exact MAP propagation and the brute-force oracle."""

from dataclasses import replace
from fractions import Fraction

import pytest

from bnmap.bench.generator import SuiteSpec
from bnmap.core.network import NetworkBuilder, Query
from bnmap.core.numeric import Backend
from bnmap.decomposition.annotate import prepare_decomposition
from bnmap.errors import (
    IncomparableCandidatesError,
    InvalidQueryError,
    OracleGuardError,
    ZeroProbabilityEvidenceError,
)
from bnmap.inference.factors import Factor
from bnmap.inference.map_exact import MapSolver, decide_map, solve_map
from bnmap.inference.oracle import brute_force_joint, brute_force_map, oracle_feasible
from bnmap.inference.pareto import Candidate, discards, dominates, prune

from conftest import build_sprinkler, make_query, multi_map_instances

F = Fraction


def cand(values, processed=(), key=()):
    """Float candidate over variable 0 (or a scalar for a single value)."""
    if len(values) == 1:
        vector = Factor((), Backend.FLOAT.array(values[0]))
    else:
        vector = Factor((0,), Backend.FLOAT.array(values))
    return Candidate(key, tuple(processed), vector)


def solve(net, query, **kwargs):
    return solve_map(net, query, prepare_decomposition(net, query), **kwargs)


class TestDominance:
    """Test candidate comparison."""

    def test_dominates(self):
        """Test weak-everywhere, strict-somewhere dominance."""
        assert dominates(cand([0.5, 0.4]), cand([0.5, 0.3]))
        assert not dominates(cand([0.5, 0.3]), cand([0.5, 0.3]))
        assert not dominates(cand([0.6, 0.2]), cand([0.5, 0.3]))

    def test_incomparable(self):
        """Test that different groups or dimensions cannot be compared."""
        with pytest.raises(IncomparableCandidatesError):
            dominates(cand([0.5, 0.4], key=((1, 0),)), cand([0.5, 0.4], key=((1, 1),)))
        with pytest.raises(IncomparableCandidatesError):
            dominates(cand([0.5, 0.4]), cand([0.5]))

    def test_identical_vectors_keep_smaller_map(self):
        """Test that equal vectors keep the lexicographically smaller assignment."""
        a = cand([0.5, 0.4], processed=((3, 0),))
        b = cand([0.5, 0.4], processed=((3, 1),))
        assert discards(a, b)
        assert not discards(b, a)

    def test_tie_safe_keeps_shared_maximum(self):
        """Test that a dominating vector with a larger map keeps a tied rival."""
        a = cand([0.5, 0.5], processed=((3, 1),))
        b = cand([0.5, 0.4], processed=((3, 0),))
        assert not discards(a, b, tie_safe=True)
        assert discards(a, b, tie_safe=False)
        strict = cand([0.6, 0.5], processed=((3, 1),))
        assert discards(strict, b, tie_safe=True)


class TestPrune:
    """Test frontier maintenance."""

    def test_frontier(self):
        """Test that dominated candidates disappear and incomparable ones stay."""
        pset = prune([
            cand([0.5, 0.1], ((0, 0),)),
            cand([0.1, 0.5], ((0, 1),)),
            cand([0.05, 0.05], ((0, 2),)),
        ])
        assert len(pset) == 2
        assert {c.processed_map for c in pset} == {((0, 0),), ((0, 1),)}

    def test_groups_pruned_separately(self):
        """Test that candidates of different groups never remove each other."""
        pset = prune([
            cand([0.9, 0.9], ((0, 0),), key=((5, 0),)),
            cand([0.1, 0.1], ((0, 1),), key=((5, 1),)),
        ])
        assert len(pset.groups) == 2
        assert len(pset) == 2

    def test_zero_vectors(self):
        """Test that zeros go unless a group would become empty."""
        pset = prune([
            cand([0.0, 0.0], ((0, 0),), key=((5, 0),)),
            cand([0.2, 0.0], ((0, 1),), key=((5, 0),)),
            cand([0.0, 0.0], ((0, 2),), key=((5, 1),)),
            cand([0.0, 0.0], ((0, 1),), key=((5, 1),)),
        ])
        assert [c.processed_map for c in pset.group(((5, 0),))] == [((0, 1),)]
        assert [c.processed_map for c in pset.group(((5, 1),))] == [((0, 1),)]

    def test_insertion_order_irrelevant(self):
        """Test that the frontier does not depend on input order."""
        items = [
            cand([0.3, 0.3], ((0, 2),)),
            cand([0.3, 0.3], ((0, 1),)),
            cand([0.4, 0.1], ((0, 0),)),
            cand([0.2, 0.35], ((0, 3),)),
        ]
        forward = {c.processed_map for c in prune(items)}
        backward = {c.processed_map for c in prune(list(reversed(items)))}
        assert forward == backward == {((0, 1),), ((0, 0),), ((0, 3),)}


class TestExactMap:
    """Test exact MAP against hand values and the oracle."""

    def test_chain_with_evidence(self, chain_net):
        """Test argmax_A p(A, B=0) = (A=0, 27/100)."""
        solution = solve(chain_net, make_query(chain_net, ["A"], {"B": 0}))
        assert solution.assignment == {0: 0}
        assert solution.value == F(27, 100)

    def test_chain_without_evidence(self, chain_net):
        """Test argmax_A p(A) = (A=1, 7/10)."""
        solution = solve(chain_net, make_query(chain_net, ["A"]))
        assert solution.named_assignment(chain_net) == {"A": 1}
        assert solution.value == F(7, 10)

    def test_ties_go_to_smallest_assignment(self):
        """Test that exactly tied assignments resolve to the smallest states."""
        b = NetworkBuilder()
        b.add_variable("A", 2)
        b.add_variable("B", 3)
        b.set_cpt("A", [[F(1, 2), F(1, 2)]])
        b.set_cpt("B", [[F(1, 3), F(1, 3), F(1, 3)]])
        net = b.build("rational")
        query = make_query(net, ["A", "B"])
        solution = solve(net, query)
        assert solution.assignment == {0: 0, 1: 0}
        assert solution.value == F(1, 6)
        assert brute_force_map(net, query).assignment == solution.assignment

    @pytest.mark.parametrize(
        "map_names,evidence",
        [
            (["C"], {"W": 1}),
            (["S", "R"], {"W": 1}),
            (["C", "W"], {}),
            (["R"], {"S": 1, "W": 0}),
            (["C", "S", "R", "W"], {}),
        ],
    )
    def test_sprinkler_matches_oracle(self, sprinkler_net, map_names, evidence):
        """Test several queries on a looped network."""
        query = make_query(sprinkler_net, map_names, evidence)
        expected = brute_force_map(sprinkler_net, query)
        solution = solve(sprinkler_net, query)
        assert solution.assignment == expected.assignment
        assert solution.value == expected.value

    def test_ternary_matches_oracle(self, ternary_net):
        """Test mixed cardinalities with a MAP variable below the evidence."""
        for map_names, evidence in ((["T", "V"], {"Z": 2}), (["T", "Z"], {}), (["U"], {"Z": 0})):
            query = make_query(ternary_net, map_names, evidence)
            expected = brute_force_map(ternary_net, query)
            solution = solve(ternary_net, query)
            assert solution.assignment == expected.assignment
            assert solution.value == expected.value

    @pytest.mark.parametrize("family", ["poly", "rand", "rand-tw2"])
    def test_random_instances_match_oracle(self, family):
        """Test generated multi-variable MAP instances, converted to exact arithmetic."""
        spec = SuiteSpec(family=family, base_size=5, max_card=2, seed=3, ss_bucket="0-10")
        for net, query in multi_map_instances(spec, 4):
            exact = net.with_backend("rational")
            query = Query.create(exact, [exact.names[v] for v in query.map_vars],
                                 {exact.names[v]: s for v, s in query.evidence})
            expected = brute_force_map(exact, query)
            solution = solve(exact, query)
            assert solution.assignment == expected.assignment
            assert solution.value == expected.value

    def test_float_backend_close_to_oracle(self):
        """Test the float backend on the sprinkler."""
        net = build_sprinkler("f64")
        query = make_query(net, ["S", "R"], {"W": 1})
        assert solve(net, query).value == pytest.approx(float(brute_force_map(net, query).value))

    def test_pruning_off_gives_same_answer(self, sprinkler_net):
        """Test that disabling pruning changes sizes, not answers."""
        query = make_query(sprinkler_net, ["C", "R"], {"W": 1})
        pruned = solve(sprinkler_net, query)
        unpruned = solve(sprinkler_net, query, pruning=False)
        assert pruned.assignment == unpruned.assignment
        assert pruned.value == unpruned.value
        assert unpruned.stats["avg_pareto"] >= pruned.stats["avg_pareto"]

    def test_threads_same_answer(self, ternary_net):
        """Test level-parallel propagation."""
        query = make_query(ternary_net, ["T", "V"], {"Z": 1})
        assert solve(ternary_net, query, threads=2).value == solve(ternary_net, query).value

    def test_statistics(self, sprinkler_net):
        """Test the reported statistics."""
        solution = solve(sprinkler_net, make_query(sprinkler_net, ["C"], {"W": 1}))
        stats = solution.stats
        for key in ("avg_pareto", "avg_dim", "max_pareto", "clusters", "width", "per_cluster"):
            assert key in stats
        assert stats["avg_pareto"] >= 1
        assert len(stats["per_cluster"]) == stats["clusters"]

    def test_zero_evidence(self):
        """Test that impossible evidence raises."""
        b = NetworkBuilder()
        b.add_variable("A", 2)
        b.add_variable("B", 2)
        b.set_parents("B", ["A"])
        b.set_cpt("A", [[F(1, 2), F(1, 2)]])
        b.set_cpt("B", [[F(1), F(0)], [F(1), F(0)]])
        net = b.build("rational")
        query = make_query(net, ["A"], {"B": 1})
        with pytest.raises(ZeroProbabilityEvidenceError):
            solve(net, query)
        with pytest.raises(ZeroProbabilityEvidenceError):
            brute_force_map(net, query)

    def test_empty_map_set(self, chain_net):
        """Test that no MAP variables yields p(e)."""
        solution = solve(chain_net, make_query(chain_net, [], {"B": 0}))
        assert solution.assignment == {}
        assert solution.value == F(41, 100)

    def test_solver_object(self, sprinkler_net):
        """Test the class interface and its propagated sets."""
        query = make_query(sprinkler_net, ["S"], {"W": 0})
        decomp = prepare_decomposition(sprinkler_net, query)
        sets = MapSolver(sprinkler_net, decomp).propagate(query)
        assert set(sets) == set(range(decomp.size))


@pytest.fixture
def three_chain():
    """A -> M -> B, all binary."""
    b = NetworkBuilder()
    for name in ("A", "M", "B"):
        b.add_variable(name, 2)
    b.set_parents("M", ["A"])
    b.set_parents("B", ["M"])
    b.set_cpt("A", [[F(3, 10), F(7, 10)]])
    b.set_cpt("M", [[F(1, 2), F(1, 2)], [F(1, 5), F(4, 5)]])
    b.set_cpt("B", [[F(9, 10), F(1, 10)], [F(1, 4), F(3, 4)]])
    return b.build()


class TestCombineCluster:
    """Test the per-cluster candidate construction."""

    def test_without_map_variables(self, sprinkler_net):
        """Test that each cluster keeps one candidate and the root holds p(e)."""
        query = make_query(sprinkler_net, [], {"W": 1})
        decomp = prepare_decomposition(sprinkler_net, query)
        sets = MapSolver(sprinkler_net, decomp).propagate(query)
        assert all(len(sets[j]) == 1 for j in sets)
        root = next(iter(sets[decomp.base.root]))
        assert root.vector.item() == brute_force_joint(sprinkler_net, {3: 1})

    def test_map_cut_gives_scalars(self, three_chain):
        """Test that separators inside MAP and evidence carry one-entry vectors."""
        query = make_query(three_chain, ["M"], {"B": 0})
        decomp = prepare_decomposition(three_chain, query)
        sets = MapSolver(three_chain, decomp).propagate(query)
        cut = [j for j in sets if j != decomp.base.root and decomp.separator(j) <= {1, 2}]
        assert cut
        assert all(c.dim == 1 for j in cut for c in sets[j])

    def test_middle_map_matches_enumeration(self, three_chain):
        """Test root candidates against p(M=m, B=0) by enumeration."""
        query = make_query(three_chain, ["M"], {"B": 0})
        decomp = prepare_decomposition(three_chain, query)
        sets = MapSolver(three_chain, decomp, pruning=False).propagate(query)
        values = {c.processed_map: c.vector.item() for c in sets[decomp.base.root]}
        assert values == {
            ((1, m),): brute_force_joint(three_chain, {1: m, 2: 0}) for m in (0, 1)
        }


class TestDecision:
    """Test decision-MAP."""

    def test_threshold(self, chain_net):
        """Test both sides of the threshold."""
        query = make_query(chain_net, ["A"], {"B": 0})
        decomp = prepare_decomposition(chain_net, query)
        above, _ = decide_map(chain_net, replace(query, threshold=F(1, 4)), decomp)
        below, _ = decide_map(chain_net, replace(query, threshold=F(27, 100)), decomp)
        assert above
        assert not below

    def test_missing_threshold(self, chain_net):
        """Test that a query without threshold is rejected."""
        query = make_query(chain_net, ["A"])
        with pytest.raises(InvalidQueryError):
            decide_map(chain_net, query, prepare_decomposition(chain_net, query))


class TestOracle:
    """Test the enumeration guards."""

    def test_map_guard(self):
        """Test that more than 2^20 MAP states are refused."""
        b = NetworkBuilder()
        for i in range(21):
            b.add_variable(f"V{i}", 2)
            b.set_cpt(f"V{i}", [[0.5, 0.5]])
        net = b.build("f64")
        query = make_query(net, [f"V{i}" for i in range(21)])
        assert not oracle_feasible(net, query)
        with pytest.raises(OracleGuardError):
            brute_force_map(net, query)

    def test_feasible(self, sprinkler_net):
        """Test the feasibility check on a small query."""
        assert oracle_feasible(sprinkler_net, make_query(sprinkler_net, ["C"]))
