"""Tests for the lattice-reduced approximate MAP solver."""

import math

import pytest

from bnmap.bench.generator import SuiteSpec
from bnmap.core.network import NetworkBuilder
from bnmap.core.numeric import Backend
from bnmap.decomposition.annotate import prepare_decomposition
from bnmap.errors import BackendMismatchError, ZeroProbabilityEvidenceError
from bnmap.inference.factors import Factor
from bnmap.inference.fptas import (
    Lattice,
    bucket_coords,
    guarantee_record,
    lattice_floor,
    reduce_pareto,
    solve_map_approx,
)
from bnmap.inference.map_exact import MapSolver, solve_map
from bnmap.inference.pareto import Candidate, ParetoSet

from conftest import build_sprinkler, make_query, multi_map_instances


@pytest.fixture
def float_sprinkler():
    """Sprinkler network in the float backend."""
    return build_sprinkler("f64")


@pytest.fixture
def lattice(float_sprinkler):
    """Multiplicative lattice for the sprinkler with eps = 0.1."""
    decomp = prepare_decomposition(float_sprinkler)
    return Lattice.for_problem(float_sprinkler, decomp, 0.1, "mult")


@pytest.fixture
def deterministic_net():
    """A -> B copy with zero entries, B -> C noisy, A -> D always 0."""
    b = NetworkBuilder()
    for name, card in (("A", 3), ("B", 2), ("C", 2), ("D", 2)):
        b.add_variable(name, card)
    b.set_parents("B", ["A"])
    b.set_parents("C", ["B"])
    b.set_parents("D", ["A"])
    b.set_cpt("A", [[0.2, 0.3, 0.5]])
    b.set_cpt("B", [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    b.set_cpt("C", [[0.9, 0.1], [0.2, 0.8]])
    b.set_cpt("D", [[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    return b.build("f64")


def vector_cand(values, processed):
    return Candidate((), processed, Factor((0,), Backend.FLOAT.array(values)))


def random_instances(family, count=4):
    spec = SuiteSpec(family=family, base_size=8, max_card=3, seed=21, ss_bucket="0-10",
                     evidence_count=2)
    return multi_map_instances(spec, count)


class TestLattice:
    """Test the bucketing scheme."""

    def test_ratio(self, float_sprinkler, lattice):
        """Test ratio = 1 + eps / (2 w' n')."""
        decomp = prepare_decomposition(float_sprinkler)
        expected = 1 + 0.1 / (2 * (decomp.width + 1) * decomp.size)
        assert lattice.ratio == pytest.approx(expected)
        assert lattice.mode == "multiplicative"

    def test_bucket_edges(self, lattice):
        """Test that one is bucket 0 and zero has its own bin."""
        assert lattice.bucket(1.0, 2) == 0
        assert lattice.bucket(0.0, 2) == -1
        assert lattice.bucket(1.0 / lattice.ratio ** 3.5, 2) == 3

    def test_clamped_to_floor(self, lattice):
        """Test that tiny values share the last bucket."""
        assert lattice.bucket(1e-300, 2) == lattice.floor_bucket
        assert lattice.floor_bucket >= lattice.bucket(lattice.floor, 2)

    def test_floor(self, float_sprinkler):
        """Test (smallest nonzero entry)^n."""
        assert lattice_floor(float_sprinkler) == pytest.approx(0.01 ** 4)

    @pytest.mark.parametrize("family", ["poly", "rand", "rand-tw3"])
    def test_floor_below_message_entries(self, family):
        """Test that no nonzero message entry falls under the lattice floor."""
        for net, query in random_instances(family, count=2):
            decomp = prepare_decomposition(net, query)
            floor = Lattice.for_problem(net, decomp, 0.5, "mult").floor
            assert floor > 0
            for pset in MapSolver(net, decomp).propagate(query).values():
                for cand in pset:
                    positive = cand.flat[cand.flat > 0]
                    assert all(x >= floor * (1 - 1e-9) for x in positive)

    def test_additive_step(self, float_sprinkler):
        """Test uniform bins of width eps / (2 w' n' d)."""
        decomp = prepare_decomposition(float_sprinkler)
        lat = Lattice.for_problem(float_sprinkler, decomp, 0.2, "additive")
        step = 0.2 / (2 * (decomp.width + 1) * decomp.size * 4)
        assert lat.step(4) == pytest.approx(step)
        assert lat.bucket(step * 2.5, 4) == 2
        assert bucket_coords([0.0, step * 1.5], lat) == (-1, 1)

    @pytest.mark.parametrize("epsilon", [0.0, -0.5, 1.5])
    def test_epsilon_range(self, float_sprinkler, epsilon):
        """Test that epsilon must lie in (0, 1]."""
        decomp = prepare_decomposition(float_sprinkler)
        with pytest.raises(ValueError):
            Lattice.for_problem(float_sprinkler, decomp, epsilon, "mult")


class TestReduce:
    """Test the per-group thinning."""

    def test_never_grows(self, float_sprinkler):
        """Test that every reduced set is no larger and keeps its groups."""
        query = make_query(float_sprinkler, ["C", "S", "R"], {"W": 1})
        decomp = prepare_decomposition(float_sprinkler, query)
        lat = Lattice.for_problem(float_sprinkler, decomp, 1.0, "additive")
        for pset in MapSolver(float_sprinkler, decomp).propagate(query).values():
            reduced = reduce_pareto(pset, lat)
            assert len(reduced) <= len(pset)
            assert set(reduced.groups) == set(pset.groups)
            assert all(reduced.groups[k] for k in reduced.groups if pset.groups[k])

    def test_one_survivor_per_cell(self, float_sprinkler):
        """Test that a cell holds a single candidate."""
        query = make_query(float_sprinkler, ["C", "S", "R", "W"])
        decomp = prepare_decomposition(float_sprinkler, query)
        lat = Lattice.for_problem(float_sprinkler, decomp, 1.0, "additive")
        for pset in MapSolver(float_sprinkler, decomp).propagate(query).values():
            for frontier in reduce_pareto(pset, lat).groups.values():
                cells = [bucket_coords(c.vector, lat) for c in frontier]
                assert len(cells) == len(set(cells))

    def test_reduction_drops_candidates(self):
        """Test that the lattice merges candidates on multi-variable MAP queries."""
        dropped = 0
        for family in ("poly", "rand", "rand-tw3"):
            for net, query in random_instances(family):
                assert len(query.map_vars) > 1
                decomp = prepare_decomposition(net, query)
                lat = Lattice.for_problem(net, decomp, 1.0, "additive")
                for pset in MapSolver(net, decomp).propagate(query).values():
                    dropped += len(pset) - len(reduce_pareto(pset, lat))
        assert dropped > 0

    @pytest.mark.parametrize("mode", ["multiplicative", "additive"])
    def test_zero_coordinates_keep_their_own_cell(self, mode):
        """Test that a zero entry never shares a cell with a positive one."""
        lat = Lattice(1.0, mode, 1, 1, 1e-12, 12 * math.log(10))
        a = vector_cand([0.0, 1e-9], ((5, 0),))
        b = vector_cand([1e-9, 0.0], ((5, 1),))
        c = vector_cand([1e-9, 0.95e-9], ((5, 2),))
        reduced = reduce_pareto(ParetoSet({(): [a, b, c]}), lat)
        assert len(reduced) == 3

        d = vector_cand([0.95e-9, 1e-9], ((5, 3),))
        merged = reduce_pareto(ParetoSet({(): [c, d]}), lat)
        assert len(merged) == 1
        assert merged.groups[()][0].processed_map == ((5, 2),)


class TestApproximateMap:
    """Test the solver and its guarantee."""

    @pytest.mark.parametrize("mode", ["multiplicative", "additive"])
    def test_guarantee_on_sprinkler(self, float_sprinkler, mode):
        """Test the bound against the exact answer."""
        query = make_query(float_sprinkler, ["C", "S"], {"W": 1})
        decomp = prepare_decomposition(float_sprinkler, query)
        exact = solve_map(float_sprinkler, query, decomp).value
        approx = solve_map_approx(float_sprinkler, query, decomp, 0.05, mode)
        if mode == "multiplicative":
            assert approx.value * (1 + 0.05) >= exact * (1 - 1e-12)
        else:
            assert approx.value >= exact - 0.05 - 1e-12
        assert approx.value <= exact * (1 + 1e-12)

    @pytest.mark.parametrize("family", ["poly", "rand", "rand-tw3"])
    @pytest.mark.parametrize("mode,epsilon", [("multiplicative", 0.5), ("additive", 0.1)])
    def test_guarantee_on_random(self, family, mode, epsilon):
        """Test the bound on generated instances."""
        for net, query in random_instances(family):
            decomp = prepare_decomposition(net, query)
            exact = solve_map(net, query, decomp).value
            approx = solve_map_approx(net, query, decomp, epsilon, mode)
            if mode == "multiplicative":
                assert approx.value >= exact / (1 + epsilon) * (1 - 1e-9)
            else:
                assert approx.value >= exact - epsilon - 1e-12
            assert approx.value <= exact * (1 + 1e-9)

    @pytest.mark.parametrize("mode", ["multiplicative", "additive"])
    def test_positive_optimum_never_rounds_to_zero(self, deterministic_net, mode):
        """Test that a positive exact optimum gives a positive approximate value."""
        query = make_query(deterministic_net, ["A", "B"], {"C": 1})
        decomp = prepare_decomposition(deterministic_net, query)
        exact = solve_map(deterministic_net, query, decomp)
        approx = solve_map_approx(deterministic_net, query, decomp, 1.0, mode)
        assert exact.value == pytest.approx(0.24)
        assert approx.value > 0
        assert approx.value <= exact.value * (1 + 1e-9)

    @pytest.mark.parametrize("mode", ["multiplicative", "additive"])
    def test_zero_answers_agree(self, deterministic_net, mode):
        """Test that impossible evidence is reported by both solvers alike."""
        query = make_query(deterministic_net, ["A", "B"], {"D": 1})
        decomp = prepare_decomposition(deterministic_net, query)
        with pytest.raises(ZeroProbabilityEvidenceError):
            solve_map(deterministic_net, query, decomp)
        with pytest.raises(ZeroProbabilityEvidenceError):
            solve_map_approx(deterministic_net, query, decomp, 1.0, mode)

    def test_zero_approximate_value_only_for_zero_optimum(self):
        """Test on generated instances that the approximate value is zero only when the optimum is."""
        for family in ("poly", "rand", "rand-tw3"):
            for net, query in random_instances(family, count=2):
                decomp = prepare_decomposition(net, query)
                exact = solve_map(net, query, decomp).value
                approx = solve_map_approx(net, query, decomp, 1.0, "additive").value
                assert (approx > 0) == (exact > 0)

    def test_guarantee_record(self, float_sprinkler):
        """Test the reported guarantee fields."""
        query = make_query(float_sprinkler, ["R"], {"W": 1})
        decomp = prepare_decomposition(float_sprinkler, query)
        solution = solve_map_approx(float_sprinkler, query, decomp, 0.1, "mult")
        record = solution.guarantee
        assert record["mode"] == "multiplicative"
        assert record["lower_bound_claimed"] == solution.value
        assert record["upper_bound_on_optimum"] == pytest.approx(solution.value * 1.1)
        assert "cluster_weights" in solution.stats

    def test_additive_upper_bound_capped(self, lattice):
        """Test that the additive upper bound never exceeds one."""
        additive = Lattice(0.5, "additive", lattice.w_prime, lattice.n_prime, lattice.floor,
                           lattice.log_inv_floor)
        assert guarantee_record(additive, 0.9)["upper_bound_on_optimum"] == 1.0
        assert math.isclose(guarantee_record(additive, 0.2)["upper_bound_on_optimum"], 0.7)

    def test_rational_backend_rejected(self, sprinkler_net):
        """Test that exact arithmetic is refused."""
        query = make_query(sprinkler_net, ["C"])
        decomp = prepare_decomposition(sprinkler_net, query)
        with pytest.raises(BackendMismatchError):
            solve_map_approx(sprinkler_net, query, decomp, 0.1)
