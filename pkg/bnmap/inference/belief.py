"""Belief updating by bottom-up message passing over an annotated decomposition."""

import logging
from typing import Dict, Mapping, Optional

from ..core.network import Instantiation, Network, make_instantiation
from ..core.numeric import ProbValue
from ..decomposition.annotate import AnnotatedDecomposition
from ..errors import DecompositionError, InvalidQueryError, ZeroProbabilityEvidenceError
from .factors import Factor, multiply
from .scheduler import Deadline, run_bottom_up

logger = logging.getLogger(__name__)


def check_compatible(net: Network, decomp: AnnotatedDecomposition) -> None:
    """Raise DecompositionError unless ``decomp`` was annotated for ``net``."""
    if decomp.cardinalities != net.cardinalities:
        raise DecompositionError("decomposition was annotated for a different network")


class BeliefUpdater:
    """Computes p(x'), p(x, e) and p(x | e).

    Instantiated variables are fixed in the CPT factors from the start, so
    every message ranges over its cluster's separator minus those variables
    (a scalar when nothing is left).
    """

    def __init__(
        self,
        net: Network,
        decomp: AnnotatedDecomposition,
        threads: int = 1,
        deadline: Optional[Deadline] = None,
    ):
        check_compatible(net, decomp)
        self.net = net
        self.decomp = decomp
        self.threads = threads
        self.deadline = deadline

    def messages(self, fixed: Mapping[int, int]) -> Dict[int, Factor]:
        """Upward message of every cluster given the instantiated variables."""
        net, decomp = self.net, self.decomp

        def step(j: int, done: Mapping[int, Factor]) -> Factor:
            factors = [Factor.from_cpt(net, i, fixed) for i in sorted(decomp.x_proc[j])]
            factors.extend(done[c] for c in decomp.children[j])
            product = multiply(factors, net.backend)
            message = product.sum_out(decomp.x_last[j])
            scope = sorted(v for v in decomp.separator(j) if v not in fixed)
            return message.expand(scope, decomp.cardinalities)

        return run_bottom_up(decomp, step, self.threads, self.deadline)

    def marginal(self, target: Mapping[int, int]) -> ProbValue:
        """
        p(x') for a partial instantiation x'.

        Args:
            target: variable id -> state

        Returns:
            Probability in the network's backend (zero is a valid answer)
        """
        fixed = make_instantiation(self.net, target)
        return self.messages(fixed)[self.decomp.base.root].item()

    def joint(self, x: Mapping[int, int], e: Mapping[int, int]) -> ProbValue:
        """p(x, e) for disjoint x and e."""
        combined = _disjoint_union(make_instantiation(self.net, x), make_instantiation(self.net, e))
        return self.marginal(combined)

    def conditional(self, x: Mapping[int, int], e: Mapping[int, int]) -> ProbValue:
        """p(x | e) = p(x, e) / p(e).

        Raises:
            ZeroProbabilityEvidenceError: p(e) = 0
        """
        e = make_instantiation(self.net, e)
        combined = _disjoint_union(make_instantiation(self.net, x), e)
        p_e = self.marginal(e)
        if p_e == 0:
            raise ZeroProbabilityEvidenceError("zero-probability evidence")
        return self.marginal(combined) / p_e


def _disjoint_union(x: Mapping[int, int], e: Mapping[int, int]) -> Instantiation:
    overlap = set(x) & set(e)
    if overlap:
        raise InvalidQueryError(f"target and evidence share variables {sorted(overlap)}")
    combined = dict(e)
    combined.update(x)
    return combined


def marginal(net: Network, decomp: AnnotatedDecomposition, target: Mapping[int, int]) -> ProbValue:
    """Convenience function for p(x')."""
    return BeliefUpdater(net, decomp).marginal(target)


def conditional(
    net: Network, decomp: AnnotatedDecomposition, x: Mapping[int, int], e: Mapping[int, int]
) -> ProbValue:
    """Convenience function for p(x | e)."""
    return BeliefUpdater(net, decomp).conditional(x, e)


def joint_query(
    net: Network, decomp: AnnotatedDecomposition, x: Mapping[int, int], e: Mapping[int, int]
) -> ProbValue:
    """Convenience function for p(x, e)."""
    return BeliefUpdater(net, decomp).joint(x, e)


def cost_estimate(decomp: AnnotatedDecomposition) -> int:
    """Operation-count bound: sum over clusters of (1 + #children) * z(C_j)."""
    return sum(
        (1 + len(decomp.children[j])) * decomp.zsize(decomp.clusters[j]) for j in range(decomp.size)
    )
