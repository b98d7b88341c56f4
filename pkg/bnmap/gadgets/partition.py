"""PARTITION instances compiled into polytree and HMM-shaped MAP gadgets."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from ..core.network import NetworkBuilder, Query
from ..errors import GadgetInputError, NetworkParseError
from .artifact import THRESHOLD_DECISION, Certificate, GadgetArtifact
from .dyadic import bit_length_sum, dyadic_pow2_up, pow2_of_pow2_up

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class PartitionInstance:
    """Positive integers s_1..s_m to be split into two halves of equal sum."""

    values: Tuple[int, ...]
    total: int
    half_sum: Fraction
    v: Tuple[Fraction, ...]
    b: int

    @property
    def m(self) -> int:
        return len(self.values)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "PartitionInstance":
        """
        Args:
            values: positive integers

        Raises:
            GadgetInputError: empty input or a non-positive entry
        """
        values = tuple(int(s) for s in values)
        if not values:
            raise GadgetInputError("partition instance needs at least one value")
        bad = [s for s in values if s < 1]
        if bad:
            raise GadgetInputError(f"partition values must be positive, got {bad}")
        total = sum(values)
        half_sum = Fraction(total, 2)
        return cls(
            values=values,
            total=total,
            half_sum=half_sum,
            v=tuple(Fraction(s) / half_sum for s in values),
            b=bit_length_sum(values),
        )

    def has_even_partition(self) -> bool:
        """Subset-sum by bitset: is some subset worth exactly total / 2?"""
        if self.total % 2:
            return False
        reachable = 1
        for s in self.values:
            reachable |= reachable << s
        return bool((reachable >> (self.total // 2)) & 1)


def parse_partition(text: str) -> PartitionInstance:
    """One line (or more) of whitespace-separated positive integers; '#' starts a comment."""
    tokens: List[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        tokens.extend(line.split())
    try:
        values = [int(tok) for tok in tokens]
    except ValueError as exc:
        raise NetworkParseError(f"partition input must be integers: {exc}")
    return PartitionInstance.from_values(values)


def read_partition(path: Union[str, Path]) -> PartitionInstance:
    return parse_partition(Path(path).read_text(encoding="utf-8"))


def _decision_certificate(inst: PartitionInstance, family: str) -> Certificate:
    return Certificate(
        THRESHOLD_DECISION,
        {
            "source": family,
            "m": inst.m,
            "b": inst.b,
            "expect_above": inst.has_even_partition(),
        },
    )


def partition_to_polytree(inst: PartitionInstance, name: Optional[str] = None) -> GadgetArtifact:
    """
    Binary polytree whose best MAP value exceeds r iff ``inst`` has an even partition.

    Layout: Y0 (fixed true) heads a chain Y0 -> Y1 -> ... -> Ym; X_i feeds both
    E_i and Y_i. With x selecting the index set I and t = prod_{i in I} t_i,
    p(x, E = T, Ym = F) = t (1 - t) / 2^m, maximal when t is closest to 1/2.

    Args:
        inst: partition instance
        name: artifact name (default ``partition-polytree-m<m>``)

    Returns:
        GadgetArtifact in the rational backend with MAP over X1..Xm,
        evidence E_i = T and Ym = F, and threshold r = a'(1 - a') / 2^m
    """
    m, b = inst.m, inst.b
    t = [dyadic_pow2_up(v, 4 * b + 3).to_fraction() for v in inst.v]
    a_prime = pow2_of_pow2_up(-1, 3 * b, 3 * b + 2).to_fraction()
    threshold = a_prime * (1 - a_prime) / 2 ** m

    builder = NetworkBuilder()
    builder.add_variable("Y0", 2)
    builder.set_cpt("Y0", [[ONE, ZERO]])
    for i in range(1, m + 1):
        x, e, y, prev = f"X{i}", f"E{i}", f"Y{i}", f"Y{i - 1}"
        ti = t[i - 1]
        builder.add_variable(x, 2)
        builder.set_cpt(x, [[HALF, HALF]])
        builder.add_variable(e, 2)
        builder.set_parents(e, [x])
        builder.set_cpt(e, [[ti, 1 - ti], [ONE, ZERO]])
        builder.add_variable(y, 2)
        builder.set_parents(y, [prev, x])
        builder.set_cpt(
            y,
            [
                [ti, 1 - ti],  # prev T, x T
                [ONE, ZERO],  # prev T, x F
                [ZERO, ONE],
                [ZERO, ONE],
            ],
        )
    net = builder.build("rational")

    evidence = {f"E{i}": 0 for i in range(1, m + 1)}
    evidence[f"Y{m}"] = 1
    certificate = _decision_certificate(inst, "partition-polytree")
    query = Query.create(
        net,
        [f"X{i}" for i in range(1, m + 1)],
        evidence,
        threshold=threshold,
        certificate=certificate.to_text(),
    )
    logger.info(f"Built partition polytree gadget: m={m}, b={b}, {net.n} variables")
    return GadgetArtifact(
        name=name or f"partition-polytree-m{m}",
        network=net,
        query=query,
        certificate=certificate,
        threshold=threshold,
        source=inst,
    )


# p(X_i | D_{i-1}) for D in (T, F, *)
_HMM_TRANSITION = [
    [HALF, ZERO, ZERO, HALF, ZERO],
    [ZERO, HALF, HALF, ZERO, ZERO],
    [ZERO, ZERO, ZERO, ZERO, ONE],
]
# p(Y_i | X_i) for the five hidden states
_HMM_EMISSION = [
    [ONE, ZERO],
    [ONE, ZERO],
    [ZERO, ONE],
    [ZERO, ONE],
    [HALF, HALF],
]


def _hmm_forward(t: Fraction) -> List[List[Fraction]]:
    """p(D_i | X_i) rows for the five hidden states."""
    return [
        [t, ZERO, 1 - t],
        [ZERO, ONE, ZERO],
        [ZERO, t, 1 - t],
        [ONE, ZERO, ZERO],
        [ZERO, ZERO, ONE],
    ]


def partition_to_hmm(inst: PartitionInstance, name: Optional[str] = None) -> GadgetArtifact:
    """
    Tree-shaped HMM gadget: D0 -> X1 -> (Y1, D1), D1 -> X2 -> ...

    MAP over the emissions Y1..Ym with evidence Dm = *; the best value
    exceeds r = (1 - a/3) / 2^m iff ``inst`` has an even partition.

    Raises:
        GadgetInputError: half-sum below 2
    """
    if inst.half_sum < 2:
        raise GadgetInputError(f"HMM gadget needs a half-sum of at least 2, got {inst.half_sum}")
    m, b = inst.m, inst.b
    t = [dyadic_pow2_up(v, 6 * b + 3).to_fraction() for v in inst.v]
    a = pow2_of_pow2_up(0, 5 * b, 5 * b + 3).to_fraction()
    threshold = (1 - a / 3) / 2 ** m

    builder = NetworkBuilder()
    third = Fraction(1, 3)
    builder.add_variable("D0", 3)
    builder.set_cpt("D0", [[third, third, third]])
    for i in range(1, m + 1):
        x, y, d = f"X{i}", f"Y{i}", f"D{i}"
        builder.add_variable(x, 5)
        builder.set_parents(x, [f"D{i - 1}"])
        builder.set_cpt(x, _HMM_TRANSITION)
        builder.add_variable(y, 2)
        builder.set_parents(y, [x])
        builder.set_cpt(y, _HMM_EMISSION)
        builder.add_variable(d, 3)
        builder.set_parents(d, [x])
        builder.set_cpt(d, _hmm_forward(t[i - 1]))
    net = builder.build("rational")

    certificate = _decision_certificate(inst, "partition-hmm")
    query = Query.create(
        net,
        [f"Y{i}" for i in range(1, m + 1)],
        {f"D{m}": 2},
        threshold=threshold,
        certificate=certificate.to_text(),
    )
    logger.info(f"Built partition HMM gadget: m={m}, b={b}, {net.n} variables")
    return GadgetArtifact(
        name=name or f"partition-hmm-m{m}",
        network=net,
        query=query,
        certificate=certificate,
        threshold=threshold,
        source=inst,
    )
