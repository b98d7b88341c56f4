"""MAX-2-SAT instances compiled into naive Bayes MAP gadgets, plus amplification."""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..core.network import NetworkBuilder, Query
from ..errors import GadgetInputError, NetworkParseError
from .artifact import VALUE_EQUALS, Certificate, GadgetArtifact

logger = logging.getLogger(__name__)

Literal = Tuple[int, bool]
Clause = Tuple[Literal, Literal]

HALF = Fraction(1, 2)
ONE = Fraction(1)
ZERO = Fraction(0)


@dataclass(frozen=True)
class Max2SatInstance:
    """
    2CNF over variables 1..m; each clause holds two literals on distinct variables.

    Literals are ``(var, positive)``. Within a clause the literal with the
    smaller variable index comes first (the clause's left literal).
    """

    m: int
    clauses: Tuple[Clause, ...]

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_clauses(cls, m: int, clauses: Sequence[Sequence[Literal]]) -> "Max2SatInstance":
        """
        Raises:
            GadgetInputError: no clauses, wrong arity, repeated or out-of-range variables
        """
        if m < 1:
            raise GadgetInputError(f"need at least one variable, got m={m}")
        if not clauses:
            raise GadgetInputError("MAX-2-SAT instance needs at least one clause")
        normalized: List[Clause] = []
        for clause in clauses:
            if len(clause) != 2:
                raise GadgetInputError(f"clause {clause} does not have two literals")
            (a, pa), (b, pb) = clause
            if a == b:
                raise GadgetInputError(f"clause {clause} repeats variable {a}")
            for var in (a, b):
                if not 1 <= var <= m:
                    raise GadgetInputError(f"variable {var} outside 1..{m}")
            left, right = sorted([(int(a), bool(pa)), (int(b), bool(pb))])
            normalized.append((left, right))
        return cls(int(m), tuple(normalized))

    def satisfied(self, assignment: Sequence[bool]) -> int:
        """Clauses satisfied by ``assignment`` (index 0 is variable 1)."""
        return sum(
            1
            for clause in self.clauses
            if any(assignment[var - 1] == positive for var, positive in clause)
        )

    def max_satisfiable(self) -> int:
        """k: largest number of simultaneously satisfiable clauses (exhaustive)."""
        return max(
            self.satisfied(bits) for bits in itertools.product((True, False), repeat=self.m)
        )


def parse_dimacs(text: str) -> Max2SatInstance:
    """
    DIMACS-like 2CNF: ``p cnf <m> <clauses>`` then one clause per line, two
    signed literals terminated by 0. Lines starting with ``c`` are comments.

    Raises:
        NetworkParseError: malformed header or clause line
    """
    m = None
    expected = None
    clauses: List[Clause] = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tokens = line.split()
        if tokens[0] == "p":
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise NetworkParseError("expected 'p cnf <m> <clauses>'", line=no)
            try:
                m, expected = int(tokens[2]), int(tokens[3])
            except ValueError:
                raise NetworkParseError("header counts must be integers", line=no)
            continue
        if m is None:
            raise NetworkParseError("clause before 'p cnf' header", line=no)
        try:
            lits = [int(tok) for tok in tokens]
        except ValueError:
            raise NetworkParseError(f"bad literal in {line!r}", line=no)
        if len(lits) != 3 or lits[2] != 0 or 0 in lits[:2]:
            raise NetworkParseError("clause must be two nonzero literals followed by 0", line=no)
        clauses.append(tuple((abs(x), x > 0) for x in lits[:2]))
    if m is None:
        raise NetworkParseError("missing 'p cnf' header")
    if expected != len(clauses):
        logger.warning(f"Header announces {expected} clauses, found {len(clauses)}")
    return Max2SatInstance.from_clauses(m, clauses)


def read_dimacs(path: Union[str, Path]) -> Max2SatInstance:
    return parse_dimacs(Path(path).read_text(encoding="utf-8"))


def _feature_row(clause: Clause, side: int, var: int) -> List[Fraction]:
    """p(Y_var | c_i side) as [p(T), p(F)]; side 0 is the left literal, 1 the right."""
    (lvar, lpos), (rvar, rpos) = clause
    if side == 0:
        if var == lvar:
            return [ONE, ZERO] if lpos else [ZERO, ONE]
        return [HALF, HALF]
    if var == rvar:
        return [ONE, ZERO] if rpos else [ZERO, ONE]
    if var == lvar:
        # right-literal state only counts assignments falsifying the left literal
        return [ZERO, ONE] if lpos else [ONE, ZERO]
    return [HALF, HALF]


def max2sat_to_naivebayes(inst: Max2SatInstance, name: Optional[str] = None) -> GadgetArtifact:
    """
    Naive Bayes gadget whose MAP value is k / (2^m m').

    Root C has two states per clause (left, right) and a uniform prior;
    features Y1..Ym mirror the variables (state 0 = true) and Y0 favours
    the left-literal states. MAP is over Y0..Ym without evidence.

    Args:
        inst: MAX-2-SAT instance
        name: artifact name (default ``max2sat-m<m>-c<m'>``)
    """
    m, mc = inst.m, inst.clause_count
    k = inst.max_satisfiable()
    prior = Fraction(1, 2 * mc)

    builder = NetworkBuilder()
    builder.add_variable("C", 2 * mc)
    builder.set_cpt("C", [[prior] * (2 * mc)])
    builder.add_variable("Y0", 2)
    builder.set_parents("Y0", ["C"])
    builder.set_cpt("Y0", [[ONE, ZERO], [HALF, HALF]] * mc)
    for var in range(1, m + 1):
        feature = f"Y{var}"
        builder.add_variable(feature, 2)
        builder.set_parents(feature, ["C"])
        builder.set_cpt(
            feature,
            [_feature_row(clause, side, var) for clause in inst.clauses for side in (0, 1)],
        )
    net = builder.build("rational")

    value = Fraction(k, 2 ** m * mc)
    certificate = Certificate(
        VALUE_EQUALS, {"source": "max2sat", "k": k, "m": m, "clauses": mc, "value": value}
    )
    query = Query.create(
        net, [f"Y{var}" for var in range(m + 1)], certificate=certificate.to_text()
    )
    logger.info(f"Built naive Bayes gadget: m={m}, clauses={mc}, k={k}")
    return GadgetArtifact(
        name=name or f"max2sat-m{m}-c{mc}",
        network=net,
        query=query,
        certificate=certificate,
        source=inst,
    )


def amplify(base: GadgetArtifact, q: int, name: Optional[str] = None) -> GadgetArtifact:
    """
    q copies of ``base`` under a shared root D with p(D = T) = 1.

    Every root of a copy gains D as a parent with the same row for both
    states of D, so the copies stay independent and the MAP value is the
    base value to the power q. Copy t renames each variable ``<name>_<t>``.

    Raises:
        GadgetInputError: q < 1 or a base without a value certificate
    """
    if q < 1:
        raise GadgetInputError(f"amplification factor must be >= 1, got {q}")
    base_value = base.certificate.expected_value
    if base_value is None:
        raise GadgetInputError("only value-certified gadgets can be amplified")
    src = base.network
    if "D" in src.names:
        raise GadgetInputError("base network already has a variable named 'D'")

    builder = NetworkBuilder()
    builder.add_variable("D", 2)
    builder.set_cpt("D", [[ONE, ZERO]])
    renames: Dict[Tuple[int, int], str] = {}
    for copy in range(1, q + 1):
        for var in src.variables:
            renames[(copy, var.id)] = f"{var.name}_{copy}"
            builder.add_variable(renames[(copy, var.id)], var.cardinality)
        for var in src.variables:
            target = renames[(copy, var.id)]
            rows = [list(row) for row in src.cpts[var.id]]
            if src.parents[var.id]:
                builder.set_parents(target, [renames[(copy, p)] for p in src.parents[var.id]])
            else:
                builder.set_parents(target, ["D"])
                rows = rows * 2
            builder.set_cpt(target, rows)
    net = builder.build("rational")

    map_names = [renames[(copy, v)] for copy in range(1, q + 1) for v in base.query.map_vars]
    evidence = {
        renames[(copy, v)]: s for copy in range(1, q + 1) for v, s in base.query.evidence
    }
    params = dict(base.certificate.params)
    params.update({"q": q, "value": base_value ** q})
    certificate = Certificate(VALUE_EQUALS, params)
    query = Query.create(net, map_names, evidence, certificate=certificate.to_text())
    logger.info(f"Amplified {base.name} with q={q}: {net.n} variables")
    return GadgetArtifact(
        name=name or f"{base.name}-q{q}",
        network=net,
        query=query,
        certificate=certificate,
        source=base.source,
    )
