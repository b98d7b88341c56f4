"""BNM network and QRY query text formats."""

import difflib
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

try:
    from fuzzywuzzy import process as fuzzy_process
    FUZZYWUZZY_AVAILABLE = True
except ImportError:
    FUZZYWUZZY_AVAILABLE = False

from ..errors import InvalidQueryError, NetworkParseError, NetworkValidationError
from .network import Network, NetworkBuilder, Query
from .numeric import Backend, detect_backend, format_value

logger = logging.getLogger(__name__)

BNM_HEADER = "bnm 1"
KEYWORDS = ("var", "parents", "cpt")

FUZZY_MIN_SCORE = 60


def suggest_name(name: str, candidates: Sequence[str]) -> Optional[str]:
    """Closest known variable name, if any is reasonably close."""
    if not candidates:
        return None
    if FUZZYWUZZY_AVAILABLE:
        match = fuzzy_process.extractOne(name, list(candidates))  # type: ignore
        if match and match[1] >= FUZZY_MIN_SCORE:
            return match[0]
        return None
    close = difflib.get_close_matches(name, list(candidates), n=1, cutoff=0.6)
    return close[0] if close else None


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


class BNMReader:
    """Line-oriented parser for the BNM network format.

    Layout: header ``bnm 1``, then ``var <name> <card>``,
    ``parents <name> <p1> ...`` and ``cpt <name>`` blocks; each cpt block is
    followed by one row per parent configuration (row-major over the parents
    as declared). Entries are decimals or ``num/den`` tokens.
    """

    def __init__(self, backend: Optional[Union[str, Backend]] = None):
        self.backend = Backend.from_name(backend) if backend is not None else None

    def parse(self, text: str) -> Network:
        """
        Parse BNM text.

        Args:
            text: file contents

        Returns:
            Network in the requested backend, or rational when any entry is
            written as a fraction and float otherwise

        Raises:
            NetworkParseError: malformed syntax, unknown names or bad arity
        """
        lines = [(no, _strip(raw)) for no, raw in enumerate(text.splitlines(), start=1)]
        lines = [(no, line) for no, line in lines if line]
        if not lines:
            raise NetworkParseError("empty network file", line=1)
        header_no, header = lines[0]
        if " ".join(header.split()) != BNM_HEADER:
            raise NetworkParseError(f"expected header {BNM_HEADER!r}, got {header!r}", line=header_no)

        cards: Dict[str, int] = {}
        order: List[str] = []
        parents: Dict[str, Tuple[int, List[str]]] = {}
        cpts: Dict[str, Tuple[int, List[Tuple[int, List[str]]]]] = {}
        current: Optional[str] = None

        for no, line in lines[1:]:
            tokens = line.split()
            keyword = tokens[0]
            if keyword == "var":
                current = None
                if len(tokens) != 3:
                    raise NetworkParseError("expected 'var <name> <cardinality>'", line=no)
                name = tokens[1]
                if name in cards:
                    raise NetworkParseError(f"duplicate variable {name!r}", line=no)
                try:
                    card = int(tokens[2])
                except ValueError:
                    raise NetworkParseError(f"bad cardinality {tokens[2]!r}", line=no)
                if card < 1:
                    raise NetworkParseError(f"cardinality must be >= 1, got {card}", line=no)
                cards[name] = card
                order.append(name)
            elif keyword == "parents":
                current = None
                if len(tokens) < 2:
                    raise NetworkParseError("expected 'parents <name> <p1> ...'", line=no)
                self._known(tokens[1:], cards, no)
                if tokens[1] in parents:
                    raise NetworkParseError(f"parents of {tokens[1]!r} given twice", line=no)
                parents[tokens[1]] = (no, tokens[2:])
            elif keyword == "cpt":
                if len(tokens) != 2:
                    raise NetworkParseError("expected 'cpt <name>'", line=no)
                self._known(tokens[1:], cards, no)
                if tokens[1] in cpts:
                    raise NetworkParseError(f"cpt of {tokens[1]!r} given twice", line=no)
                current = tokens[1]
                cpts[current] = (no, [])
            else:
                if current is None:
                    raise NetworkParseError(f"unexpected line {line!r}", line=no)
                cpts[current][1].append((no, tokens))

        return self._assemble(order, cards, parents, cpts)

    def _known(self, names: Sequence[str], cards: Dict[str, int], no: int) -> None:
        for name in names:
            if name not in cards:
                raise NetworkParseError(
                    f"unknown variable {name!r}", line=no, suggestion=suggest_name(name, list(cards))
                )

    def _assemble(
        self,
        order: List[str],
        cards: Dict[str, int],
        parents: Dict[str, Tuple[int, List[str]]],
        cpts: Dict[str, Tuple[int, List[Tuple[int, List[str]]]]],
    ) -> Network:
        if not order:
            raise NetworkParseError("network declares no variables", line=1)
        all_tokens = [t for _, rows in cpts.values() for _, row in rows for t in row]
        backend = self.backend or detect_backend(all_tokens)

        builder = NetworkBuilder()
        for name in order:
            builder.add_variable(name, cards[name])
        for name in order:
            if name in parents:
                builder.set_parents(name, parents[name][1])

        for name in order:
            if name not in cpts:
                raise NetworkParseError(f"variable {name!r} has no cpt block", line=None)
            cpt_line, rows = cpts[name]
            ps = parents.get(name, (0, []))[1]
            expected = 1
            for p in ps:
                expected *= cards[p]
            if len(rows) != expected:
                raise NetworkParseError(
                    f"cpt {name!r} has {len(rows)} rows, expected {expected}", line=cpt_line
                )
            values = []
            for row_no, tokens in rows:
                if len(tokens) != cards[name]:
                    raise NetworkParseError(
                        f"cpt {name!r}: row has {len(tokens)} entries, expected {cards[name]}",
                        line=row_no,
                    )
                try:
                    values.append([backend.parse_token(t) for t in tokens])
                except (ValueError, ZeroDivisionError):
                    raise NetworkParseError(f"bad probability in {' '.join(tokens)!r}", line=row_no)
            builder.set_cpt(name, values)

        try:
            return builder.build(backend)
        except NetworkValidationError as exc:
            raise NetworkParseError(str(exc))


def parse_network(text: str, backend: Optional[Union[str, Backend]] = None) -> Network:
    """Convenience function to parse BNM text."""
    return BNMReader(backend).parse(text)


def read_network(path: Union[str, Path], backend: Optional[Union[str, Backend]] = None) -> Network:
    logger.info(f"Reading network from {path}")
    return parse_network(Path(path).read_text(encoding="utf-8"), backend)


def serialize_network(net: Network) -> str:
    """BNM text for ``net``; ``parse_network`` of the result equals ``net``."""
    lines = [BNM_HEADER]
    for var in net.variables:
        lines.append(f"var {var.name} {var.cardinality}")
    for i, ps in enumerate(net.parents):
        if ps:
            lines.append(f"parents {net.variables[i].name} " + " ".join(net.variables[p].name for p in ps))
    for i, table in enumerate(net.cpts):
        lines.append(f"cpt {net.variables[i].name}")
        for row in table:
            lines.append(" ".join(format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_query(text: str, net: Network) -> Query:
    """
    Parse QRY text against a network.

    Lines: ``map <name> ...``, ``evidence <name>=<state> ...``,
    ``threshold <num/den>`` and ``certificate <kind> <params...>``.

    Raises:
        NetworkParseError: syntax errors, unknown names, bad states
    """
    map_names: List[str] = []
    evidence: Dict[int, int] = {}
    threshold = None
    certificate = None
    seen_map = False

    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]
        if keyword == "map":
            if seen_map:
                raise NetworkParseError("duplicate 'map' line", line=no)
            seen_map = True
            for name in tokens[1:]:
                _resolve(net, name, no)
                map_names.append(name)
        elif keyword == "evidence":
            for item in tokens[1:]:
                name, sep, state = item.partition("=")
                if not sep:
                    raise NetworkParseError(f"expected name=state, got {item!r}", line=no)
                var = _resolve(net, name, no)
                try:
                    value = int(state)
                except ValueError:
                    raise NetworkParseError(f"bad state index {state!r}", line=no)
                if not 0 <= value < net.variables[var].cardinality:
                    raise NetworkParseError(
                        f"state {value} out of range for {name!r} "
                        f"(cardinality {net.variables[var].cardinality})",
                        line=no,
                    )
                evidence[var] = value
        elif keyword == "threshold":
            if len(tokens) != 2:
                raise NetworkParseError("expected 'threshold <num/den>'", line=no)
            try:
                threshold = net.backend.parse_token(tokens[1])
            except (ValueError, ZeroDivisionError):
                raise NetworkParseError(f"bad threshold {tokens[1]!r}", line=no)
        elif keyword == "certificate":
            certificate = line[len("certificate"):].strip()
        else:
            raise NetworkParseError(f"unknown query keyword {keyword!r}", line=no)

    if not seen_map:
        raise NetworkParseError("query has no 'map' line", line=None)
    try:
        return Query.create(net, map_names, evidence, threshold, certificate)
    except InvalidQueryError as exc:
        raise NetworkParseError(str(exc))


def _resolve(net: Network, name: str, no: int) -> int:
    if name not in net.names:
        raise NetworkParseError(
            f"unknown variable {name!r}", line=no, suggestion=suggest_name(name, list(net.names))
        )
    return net.index_of(name)


def read_query(path: Union[str, Path], net: Network) -> Query:
    return parse_query(Path(path).read_text(encoding="utf-8"), net)


def serialize_query(query: Query, net: Network) -> str:
    lines = ["map " + " ".join(net.variables[v].name for v in query.map_vars)]
    if query.evidence:
        lines.append(
            "evidence " + " ".join(f"{net.variables[v].name}={s}" for v, s in query.evidence)
        )
    if query.threshold is not None:
        lines.append(f"threshold {format_value(query.threshold)}")
    if query.certificate:
        lines.append(f"certificate {query.certificate}")
    return "\n".join(lines) + "\n"
