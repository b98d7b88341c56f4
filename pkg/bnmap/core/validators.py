"""Network validation with report-style results."""

import logging
import math
from typing import Any, Dict, List

import networkx as nx
import numpy as np

from ..config import FLOAT_NORMALIZATION_TOLERANCE
from ..errors import NetworkValidationError
from .network import Network, network_size, state_space_size
from .numeric import Backend

logger = logging.getLogger(__name__)


class NetworkValidator:
    """Checks the structural and numeric invariants of a Network."""

    def __init__(self, tolerance: float = FLOAT_NORMALIZATION_TOLERANCE):
        self.tolerance = tolerance

    def validate(self, net: Network) -> Dict[str, Any]:
        """
        Validate a network without raising.

        Args:
            net: Network to check

        Returns:
            Report with ``is_valid``, ``errors`` (each naming the variable and
            row at fault), ``warnings`` and a ``summary`` block
        """
        results: Dict[str, Any] = {
            'is_valid': True,
            'errors': [],
            'warnings': [],
            'summary': {},
        }

        self._validate_variables(net, results)
        self._validate_parents(net, results)
        self._validate_acyclic(net, results)
        self._validate_tables(net, results)

        results['is_valid'] = len(results['errors']) == 0
        results['summary'] = self._summarize(net, results['is_valid'])

        if not results['is_valid']:
            logger.info(f"Network failed validation with {len(results['errors'])} error(s)")
        return results

    def _validate_variables(self, net: Network, results: Dict[str, Any]) -> None:
        seen = set()
        for position, var in enumerate(net.variables):
            if var.id != position:
                results['errors'].append(f"variable {var.name!r}: id {var.id} is not dense (expected {position})")
            if var.cardinality < 1:
                results['errors'].append(f"variable {var.name!r}: cardinality {var.cardinality} < 1")
            if var.name in seen:
                results['errors'].append(f"variable {var.name!r}: duplicate name")
            seen.add(var.name)
        if len(net.parents) != net.n or len(net.cpts) != net.n:
            results['errors'].append("parents/cpts length does not match variable count")

    def _validate_parents(self, net: Network, results: Dict[str, Any]) -> None:
        for i, ps in enumerate(net.parents):
            name = net.variables[i].name
            if len(set(ps)) != len(ps):
                results['errors'].append(f"variable {name!r}: repeated parent")
            for p in ps:
                if not 0 <= p < net.n:
                    results['errors'].append(f"variable {name!r}: parent id {p} out of range")
                elif p == i:
                    results['errors'].append(f"variable {name!r}: self-loop")

    def _validate_acyclic(self, net: Network, results: Dict[str, Any]) -> None:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(net.n))
        for child, ps in enumerate(net.parents):
            graph.add_edges_from((p, child) for p in ps if 0 <= p < net.n and p != child)
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            return
        names = [net.variables[u].name for u, _ in cycle]
        results['errors'].append(f"cycle: {' -> '.join(names + names[:1])}")

    def _validate_tables(self, net: Network, results: Dict[str, Any]) -> None:
        for i, table in enumerate(net.cpts):
            name = net.variables[i].name
            ps = net.parents[i]
            if any(not 0 <= p < net.n for p in ps):
                continue
            expected_rows = state_space_size(net, ps)
            card = net.variables[i].cardinality
            if table.ndim != 2 or table.shape != (expected_rows, card):
                results['errors'].append(
                    f"variable {name!r}: table has shape {tuple(table.shape)}, "
                    f"expected {expected_rows} rows of {card} entries"
                )
                continue
            self._validate_rows(net, i, table, results)

    def _validate_rows(self, net: Network, i: int, table: np.ndarray, results: Dict[str, Any]) -> None:
        name = net.variables[i].name
        exact = net.backend is Backend.RATIONAL
        for row_idx, row in enumerate(table):
            bad = [v for v in row if not self._in_unit_interval(v, exact)]
            if bad:
                results['errors'].append(
                    f"variable {name!r}, row {row_idx}: entries outside [0,1]: {bad[:3]}"
                )
                continue
            total = sum(row, net.backend.zero)
            if exact:
                if total != 1:
                    results['errors'].append(
                        f"variable {name!r}, row {row_idx}: row does not normalize (sum {total})"
                    )
            else:
                gap = abs(float(total) - 1.0)
                if gap > self.tolerance:
                    results['errors'].append(
                        f"variable {name!r}, row {row_idx}: row does not normalize (sum {float(total)!r})"
                    )
                elif gap > 0.0:
                    results['warnings'].append(
                        f"variable {name!r}, row {row_idx}: sum differs from 1 by {gap:.2e}"
                    )

    @staticmethod
    def _in_unit_interval(value: Any, exact: bool) -> bool:
        if not exact and not math.isfinite(float(value)):
            return False
        return 0 <= value <= 1

    @staticmethod
    def _summarize(net: Network, is_valid: bool) -> Dict[str, Any]:
        summary: Dict[str, Any] = {
            'variables': net.n,
            'edges': net.edge_count,
            'backend': net.backend.value,
            'max_parents': max((len(p) for p in net.parents), default=0),
            'max_cardinality': max(net.cardinalities, default=0),
        }
        if is_valid:
            summary['size'] = network_size(net)
        return summary


def validate_network(net: Network) -> Dict[str, Any]:
    """Convenience function to validate a network."""
    return NetworkValidator().validate(net)


def require_valid(net: Network) -> Network:
    """Return ``net`` unchanged or raise NetworkValidationError."""
    report = validate_network(net)
    if not report['is_valid']:
        raise NetworkValidationError(report['errors'])
    return net
