"""Approximate MAP with a guarantee: pareto sets thinned on a hypercube lattice."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

from ..config import normalize_mode
from ..core.network import Network, Query
from ..core.numeric import Backend, ProbValue
from ..decomposition.annotate import AnnotatedDecomposition, cluster_weights
from ..errors import BackendMismatchError
from .factors import Factor
from .map_exact import MapSolution, MapSolver
from .pareto import Candidate, ParetoSet
from .scheduler import Deadline

logger = logging.getLogger(__name__)


def lattice_floor(net: Network) -> ProbValue:
    """(smallest nonzero CPT entry)^n, a lower bound on every nonzero intermediate value.

    Every such value is a sum of products of at most n CPT entries.
    """
    return net.min_nonzero_entry() ** net.n


@dataclass(frozen=True)
class Lattice:
    """Bucketing of vector coordinates for the reduced pareto sets.

    Multiplicative: coordinate x > 0 goes to bucket floor(log(1/x) / log(ratio)),
    so bucket 0 holds (1/ratio, 1] and entries sharing a bucket differ by
    less than a factor ratio = 1 + eps / (2 w' n'). Indices are clamped to the
    bucket of ``floor``.
    Additive: uniform width eps / (2 w' n' d) per coordinate, d the vector dimension.
    Zero always has its own bin, -1.
    """

    epsilon: float
    mode: str
    w_prime: int
    n_prime: int
    floor: float
    log_inv_floor: float

    @classmethod
    def for_problem(
        cls, net: Network, decomp: AnnotatedDecomposition, epsilon: float, mode: str
    ) -> "Lattice":
        if not 0 < epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
        smallest = float(net.min_nonzero_entry())
        log_inv_floor = -net.n * math.log(smallest) if smallest < 1 else 0.0
        return cls(
            epsilon=float(epsilon),
            mode=normalize_mode(mode),
            w_prime=decomp.width + 1,
            n_prime=decomp.size,
            floor=float(lattice_floor(net)),
            log_inv_floor=log_inv_floor,
        )

    @property
    def ratio(self) -> float:
        return 1.0 + self.epsilon / (2 * self.w_prime * self.n_prime)

    @property
    def floor_bucket(self) -> int:
        return int(math.floor(self.log_inv_floor / math.log(self.ratio)))

    def step(self, dim: int) -> float:
        return self.epsilon / (2 * self.w_prime * self.n_prime * max(dim, 1))

    def bucket(self, x: float, dim: int) -> int:
        if x <= 0:
            return -1
        if self.mode == "additive":
            return int(math.floor(x / self.step(dim)))
        index = int(math.floor(math.log(1.0 / x) / math.log(self.ratio)))
        return min(self.floor_bucket, max(0, index))


def bucket_coords(vector, lat: Lattice) -> Tuple[int, ...]:
    """Hypercube of a message vector (a Factor or a flat array)."""
    values = vector.flat if isinstance(vector, Factor) else vector
    flat = [float(x) for x in values]
    dim = len(flat)
    return tuple(lat.bucket(x, dim) for x in flat)


def _survivor_key(cand: Candidate) -> Tuple[float, Tuple]:
    return (-float(cand.total()), cand.processed_map)


def reduce_pareto(pset: ParetoSet, lat: Lattice) -> ParetoSet:
    """
    Keep at most one candidate per hypercube in every group.

    The survivor is the one with the largest entry sum, ties going to the
    lexicographically smaller processed_map.

    Args:
        pset: pruned pareto set
        lat: lattice

    Returns:
        ParetoSet no larger than ``pset``; non-empty groups stay non-empty
    """
    groups: Dict[Tuple, List[Candidate]] = {}
    for key, frontier in pset.groups.items():
        cells: Dict[Tuple[int, ...], Candidate] = {}
        for cand in frontier:
            cell = bucket_coords(cand.vector, lat)
            held = cells.get(cell)
            if held is None or _survivor_key(cand) < _survivor_key(held):
                cells[cell] = cand
        groups[key] = list(cells.values())
    return ParetoSet(groups)


def guarantee_record(lat: Lattice, value: float) -> Dict[str, Any]:
    """What the approximate answer certifies about the optimum."""
    if lat.mode == "multiplicative":
        upper = value * (1 + lat.epsilon)
    else:
        upper = min(1.0, value + lat.epsilon)
    return {
        "mode": lat.mode,
        "epsilon": lat.epsilon,
        "value": value,
        "lower_bound_claimed": value,
        "upper_bound_on_optimum": upper,
        "float_noise_note": "bucket indices computed in float64",
    }


def solve_map_approx(
    net: Network,
    query: Query,
    decomp: AnnotatedDecomposition,
    epsilon: float,
    mode: str = "additive",
    threads: int = 1,
    deadline: Optional[Deadline] = None,
) -> MapSolution:
    """
    Approximate MAP: exact pipeline with reduce_pareto after every cluster.

    The returned value is exact for the returned assignment. Multiplicative
    mode guarantees value >= opt / (1 + eps); additive mode value >= opt - eps.

    Raises:
        BackendMismatchError: network is not in the float backend
        ZeroProbabilityEvidenceError: same as the exact solver
    """
    if net.backend is not Backend.FLOAT:
        raise BackendMismatchError("approximate MAP runs on the float backend only")
    lat = Lattice.for_problem(net, decomp, epsilon, mode)
    logger.info(
        f"Approximate MAP: mode={lat.mode}, eps={lat.epsilon}, ratio={lat.ratio:.6g}, "
        f"w'={lat.w_prime}, n'={lat.n_prime}"
    )
    solver = MapSolver(
        net,
        decomp,
        reducer=lambda pset, j: reduce_pareto(pset, lat),
        threads=threads,
        deadline=deadline,
    )
    solution = solver.solve(query)
    solution.guarantee = guarantee_record(lat, float(solution.value))
    solution.stats["cluster_weights"] = cluster_weights(decomp)
    return solution
