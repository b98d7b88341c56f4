"""Gadget artifacts: network, query, threshold and a checkable certificate."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from ..core.network import Network, Query
from ..core.numeric import ProbValue, format_value, values_close
from ..core.reader import serialize_network, serialize_query
from ..errors import NetworkParseError

logger = logging.getLogger(__name__)

VALUE_EQUALS = "value-equals"
THRESHOLD_DECISION = "threshold-decision"


@dataclass(frozen=True)
class Certificate:
    """Closed-form relation between the MAP value and the source problem's answer.

    ``value-equals``: the optimum equals ``params['value']``.
    ``threshold-decision``: (optimum > threshold) equals ``params['expect_above']``.
    """

    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def expected_value(self) -> Optional[Fraction]:
        return self.params.get("value") if self.kind == VALUE_EQUALS else None

    @property
    def expects_above_threshold(self) -> Optional[bool]:
        return self.params.get("expect_above") if self.kind == THRESHOLD_DECISION else None

    def check(self, value: ProbValue, threshold: Optional[ProbValue] = None) -> bool:
        """Whether a computed MAP value agrees with the certificate."""
        if self.kind == VALUE_EQUALS:
            expected = self.params["value"]
            if isinstance(value, Fraction):
                return value == expected
            return values_close(float(value), float(expected))
        if threshold is None:
            raise ValueError("threshold-decision certificates need the threshold")
        return (value > threshold) == self.params["expect_above"]

    def to_text(self) -> str:
        """``<kind> key=value ...`` as written on the QRY certificate line."""
        parts = [self.kind]
        for key in sorted(self.params):
            parts.append(f"{key}={_format_param(self.params[key])}")
        return " ".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        tokens = text.split()
        if not tokens:
            raise NetworkParseError("empty certificate")
        params: Dict[str, Any] = {}
        for token in tokens[1:]:
            key, sep, raw = token.partition("=")
            if not sep:
                raise NetworkParseError(f"bad certificate parameter {token!r}")
            params[key] = _parse_param(raw)
        return cls(tokens[0], params)


def _format_param(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return format_value(value)
    return str(value)


def _parse_param(raw: str) -> Any:
    if raw in ("true", "false"):
        return raw == "true"
    if "/" in raw:
        return Fraction(raw)
    try:
        return int(raw)
    except ValueError:
        return raw


@dataclass(frozen=True)
class GadgetArtifact:
    """A generated MAP instance with a known answer."""

    name: str
    network: Network
    query: Query
    certificate: Certificate
    threshold: Optional[Fraction] = None
    source: Any = None

    def check(self, value: ProbValue) -> bool:
        return self.certificate.check(value, self.threshold)


def write_artifact(artifact: GadgetArtifact, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``<name>.bnm`` and ``<name>.qry`` (threshold and certificate lines included)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    net_path = out / f"{artifact.name}.bnm"
    query_path = out / f"{artifact.name}.qry"
    net_path.write_text(serialize_network(artifact.network), encoding="utf-8")
    query_path.write_text(serialize_query(artifact.query, artifact.network), encoding="utf-8")
    logger.info(f"Wrote gadget {artifact.name} ({artifact.network.n} variables) to {out}")
    return net_path, query_path
