"""Shared fixtures for the bnmap test suite."""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from bnmap.bench.generator import gen_random_instance
from bnmap.core.network import NetworkBuilder, Query
from bnmap.core.reader import parse_network

F = Fraction

CHAIN_TEXT = """bnm 1
# two-node chain A -> B
var A 2
var B 2
parents B A
cpt A
3/10 7/10
cpt B
9/10 1/10
1/5 4/5
"""


@pytest.fixture
def chain_text():
    """BNM text of the two-node chain."""
    return CHAIN_TEXT


@pytest.fixture
def chain_net():
    """Two-node chain A -> B in the rational backend."""
    return parse_network(CHAIN_TEXT)


def build_sprinkler(backend="rational"):
    """Cloudy -> (Sprinkler, Rain) -> Wet, with a loop in the moral graph."""
    b = NetworkBuilder()
    for name in ("C", "S", "R", "W"):
        b.add_variable(name, 2)
    b.set_parents("S", ["C"])
    b.set_parents("R", ["C"])
    b.set_parents("W", ["S", "R"])
    b.set_cpt("C", [[F(1, 2), F(1, 2)]])
    b.set_cpt("S", [[F(1, 2), F(1, 2)], [F(9, 10), F(1, 10)]])
    b.set_cpt("R", [[F(4, 5), F(1, 5)], [F(1, 5), F(4, 5)]])
    b.set_cpt(
        "W",
        [
            [F(1), F(0)],
            [F(1, 10), F(9, 10)],
            [F(1, 10), F(9, 10)],
            [F(1, 100), F(99, 100)],
        ],
    )
    net = b.build("rational")
    return net if backend == "rational" else net.with_backend(backend)


@pytest.fixture
def sprinkler_net():
    """Four-variable sprinkler network, rational backend."""
    return build_sprinkler()


@pytest.fixture
def ternary_net():
    """Mixed-cardinality network: T (3 states) -> U (2) <- V (3), U -> Z (3)."""
    b = NetworkBuilder()
    b.add_variable("T", 3)
    b.add_variable("V", 3)
    b.add_variable("U", 2)
    b.add_variable("Z", 3)
    b.set_parents("U", ["T", "V"])
    b.set_parents("Z", ["U"])
    b.set_cpt("T", [[F(1, 5), F(1, 2), F(3, 10)]])
    b.set_cpt("V", [[F(1, 3), F(1, 3), F(1, 3)]])
    rows = []
    for t in range(3):
        for v in range(3):
            p = F(1 + t + 2 * v, 10)
            rows.append([p, 1 - p])
    b.set_cpt("U", rows)
    b.set_cpt("Z", [[F(1, 2), F(1, 4), F(1, 4)], [F(1, 10), F(3, 5), F(3, 10)]])
    return b.build("rational")


def make_query(net, map_names, evidence=None):
    """Query by variable names."""
    return Query.create(net, map_names, evidence or {})


def multi_map_instances(spec, count, limit=40):
    """The first ``count`` generated instances of ``spec`` with two or more MAP variables."""
    found = []
    for index in range(limit):
        net, query = gen_random_instance(spec, index)
        if len(query.map_vars) > 1:
            found.append((net, query))
            if len(found) == count:
                break
    assert len(found) == count, f"only {len(found)} multi-variable instances in {limit}"
    return found
