"""Discrete Bayesian network data model: variables, CPTs, queries, joint probability."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from ..errors import IncompleteInstantiationError, InvalidQueryError, NetworkValidationError
from .numeric import Backend, ProbValue, backend_of_values

logger = logging.getLogger(__name__)

Instantiation = Dict[int, int]


@dataclass(frozen=True)
class Variable:
    """A discrete variable with states 0..cardinality-1."""

    id: int
    name: str
    cardinality: int


@dataclass(frozen=True, eq=False)
class Network:
    """DAG over discrete variables with one CPT per variable.

    ``cpts[i]`` has shape ``(rows, z_i)``: one row per parent configuration,
    enumerated row-major over ``parents[i]`` as declared (each parent's
    states ascending), columns are the variable's own states. Arrays are
    read-only; the rational backend stores ``Fraction`` objects.
    """

    variables: Tuple[Variable, ...]
    parents: Tuple[Tuple[int, ...], ...]
    cpts: Tuple[np.ndarray, ...]
    backend: Backend = Backend.FLOAT
    _by_name: Dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        for table in self.cpts:
            table.setflags(write=False)
        self._by_name.clear()
        self._by_name.update({v.name: v.id for v in self.variables})

    # --- structure -------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def edge_count(self) -> int:
        return sum(len(p) for p in self.parents)

    def index_of(self, name: str) -> int:
        """Variable id for a name. Raises KeyError for unknown names."""
        return self._by_name[name]

    def variable_by_name(self, name: str) -> Variable:
        return self.variables[self.index_of(name)]

    def children(self, i: int) -> List[int]:
        return [j for j, ps in enumerate(self.parents) if i in ps]

    def family(self, i: int) -> Tuple[int, ...]:
        """The variable followed by its parents."""
        return (i,) + self.parents[i]

    def to_digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        for child, ps in enumerate(self.parents):
            graph.add_edges_from((p, child) for p in ps)
        return graph

    def topological_order(self) -> List[int]:
        """Parents before children, ties by lowest id."""
        try:
            return list(nx.lexicographical_topological_sort(self.to_digraph()))
        except nx.NetworkXUnfeasible:
            raise NetworkValidationError(["cycle in parent graph"])

    # --- tables ----------------------------------------------------------

    def parent_cardinalities(self, i: int) -> Tuple[int, ...]:
        return tuple(self.variables[p].cardinality for p in self.parents[i])

    def row_index(self, i: int, inst: Mapping[int, int]) -> int:
        """Row of ``cpts[i]`` selected by the parents' states in ``inst``."""
        cards = self.parent_cardinalities(i)
        if not cards:
            return 0
        states = tuple(inst[p] for p in self.parents[i])
        return int(np.ravel_multi_index(states, cards))

    def cpt_tensor(self, i: int) -> np.ndarray:
        """CPT reshaped to ``(*parent cardinalities, z_i)``."""
        shape = self.parent_cardinalities(i) + (self.variables[i].cardinality,)
        return self.cpts[i].reshape(shape)

    def with_backend(self, backend: Union[str, Backend]) -> "Network":
        """Copy of the network with every CPT converted to ``backend``."""
        target = Backend.from_name(backend)
        if target is self.backend:
            return self
        tables = tuple(target.convert(t) for t in self.cpts)
        return Network(self.variables, self.parents, tables, target)

    def min_nonzero_entry(self) -> ProbValue:
        """Smallest strictly positive CPT entry (one for deterministic nets)."""
        best: Optional[ProbValue] = None
        for table in self.cpts:
            for value in table.flat:
                if value > 0 and (best is None or value < best):
                    best = value
        return best if best is not None else self.backend.one

    # --- comparison ------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        if (self.variables, self.parents, self.backend) != (
            other.variables,
            other.parents,
            other.backend,
        ):
            return False
        return all(
            a.shape == b.shape and bool(np.all(a == b)) for a, b in zip(self.cpts, other.cpts)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Network(n={self.n}, edges={self.edge_count}, backend={self.backend.value})"


class NetworkBuilder:
    """Incremental, name-based construction of a Network."""

    def __init__(self) -> None:
        self._names: List[str] = []
        self._cards: List[int] = []
        self._parents: Dict[str, List[str]] = {}
        self._rows: Dict[str, List[List[Any]]] = {}

    def add_variable(self, name: str, cardinality: int) -> int:
        if name in self._names:
            raise ValueError(f"duplicate variable {name!r}")
        self._names.append(name)
        self._cards.append(int(cardinality))
        return len(self._names) - 1

    def set_parents(self, name: str, parents: Sequence[str]) -> None:
        self._require(name)
        for p in parents:
            self._require(p)
        self._parents[name] = list(parents)

    def set_cpt(self, name: str, rows: Sequence[Sequence[Any]]) -> None:
        self._require(name)
        self._rows[name] = [list(r) for r in rows]

    def _require(self, name: str) -> None:
        if name not in self._names:
            raise KeyError(name)

    def build(self, backend: Optional[Union[str, Backend]] = None) -> Network:
        """Assemble the network. Every variable needs a CPT.

        Args:
            backend: explicit backend; inferred from the values when omitted

        Raises:
            NetworkValidationError: missing or ragged tables
        """
        problems = []
        for name in self._names:
            if name not in self._rows:
                problems.append(f"variable {name!r}: missing CPT")
            elif len({len(r) for r in self._rows[name]}) > 1:
                problems.append(f"variable {name!r}: ragged CPT rows")
        if problems:
            raise NetworkValidationError(problems)

        if backend is None:
            flat = [v for name in self._names for row in self._rows[name] for v in row]
            chosen = backend_of_values(flat)
        else:
            chosen = Backend.from_name(backend)

        index = {name: i for i, name in enumerate(self._names)}
        variables = tuple(
            Variable(i, name, card) for i, (name, card) in enumerate(zip(self._names, self._cards))
        )
        parents = tuple(
            tuple(index[p] for p in self._parents.get(name, [])) for name in self._names
        )
        tables = []
        for name, card in zip(self._names, self._cards):
            rows = self._rows[name]
            table = chosen.array(rows) if rows else np.empty((0, card), dtype=chosen.dtype)
            if table.ndim != 2:
                table = table.reshape(len(rows), -1)
            tables.append(table)
        return Network(variables, parents, tuple(tables), chosen)


def make_instantiation(net: Network, mapping: Mapping[Union[int, str], int]) -> Instantiation:
    """Resolve names to ids and range-check states.

    Raises:
        InvalidQueryError: unknown variable or out-of-range state
    """
    inst: Instantiation = {}
    for key, state in mapping.items():
        if isinstance(key, str):
            if key not in net.names:
                raise InvalidQueryError(f"unknown variable {key!r}")
            var = net.index_of(key)
        else:
            var = int(key)
            if not 0 <= var < net.n:
                raise InvalidQueryError(f"variable id {var} out of range")
        state = int(state)
        if not 0 <= state < net.variables[var].cardinality:
            raise InvalidQueryError(
                f"state {state} out of range for {net.variables[var].name} "
                f"(cardinality {net.variables[var].cardinality})"
            )
        inst[var] = state
    return inst


@dataclass(frozen=True)
class Query:
    """MAP variables plus evidence; gadget artifacts also carry a threshold."""

    map_vars: Tuple[int, ...]
    evidence: Tuple[Tuple[int, int], ...] = ()
    threshold: Optional[ProbValue] = None
    certificate: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "map_vars", tuple(sorted(set(self.map_vars))))
        object.__setattr__(self, "evidence", tuple(sorted(dict(self.evidence).items())))
        overlap = set(self.map_vars) & set(self.evidence_dict)
        if overlap:
            raise InvalidQueryError(f"MAP variables also observed as evidence: {sorted(overlap)}")

    @property
    def evidence_dict(self) -> Instantiation:
        return dict(self.evidence)

    @classmethod
    def create(
        cls,
        net: Network,
        map_vars: Iterable[Union[int, str]],
        evidence: Optional[Mapping[Union[int, str], int]] = None,
        threshold: Optional[ProbValue] = None,
        certificate: Optional[str] = None,
    ) -> "Query":
        """Build a query against ``net``, accepting variable names or ids."""
        ids = []
        for v in map_vars:
            if isinstance(v, str):
                if v not in net.names:
                    raise InvalidQueryError(f"unknown variable {v!r}")
                ids.append(net.index_of(v))
            else:
                if not 0 <= int(v) < net.n:
                    raise InvalidQueryError(f"variable id {v} out of range")
                ids.append(int(v))
        ev = make_instantiation(net, evidence or {})
        if threshold is not None:
            threshold = net.backend.coerce(threshold)
        return cls(tuple(ids), tuple(ev.items()), threshold, certificate)


def state_space_size(net: Network, ids: Iterable[int]) -> int:
    """z(X): product of cardinalities, with z(empty) = 1."""
    size = 1
    for i in ids:
        size *= net.variables[i].cardinality
    return size


def joint_probability(net: Network, full: Mapping[int, int]) -> ProbValue:
    """p(x) = prod_i p(x_i | parents) for a full instantiation.

    Raises:
        IncompleteInstantiationError: some variable is unassigned
    """
    missing = [v.name for v in net.variables if v.id not in full]
    if missing:
        raise IncompleteInstantiationError(f"unassigned variables: {', '.join(missing)}")
    value = net.backend.one
    for i in range(net.n):
        value = value * net.cpts[i][net.row_index(i, full), full[i]]
    if net.backend is Backend.RATIONAL:
        return Fraction(value)
    return float(value)


def network_size(net: Network) -> int:
    """Sum of z(X_i and its parents) over all tables, plus the edge count."""
    return sum(state_space_size(net, net.family(i)) for i in range(net.n)) + net.edge_count
