"""Numeric backends: float64 and exact rationals over numpy arrays."""

import logging
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

import numpy as np

from ..errors import BackendMismatchError

logger = logging.getLogger(__name__)

ProbValue = Union[float, Fraction]


class Backend(str, Enum):
    """Arithmetic used for CPT entries and every quantity derived from them."""

    FLOAT = "f64"
    RATIONAL = "rational"

    @classmethod
    def from_name(cls, name: Union[str, "Backend"]) -> "Backend":
        if isinstance(name, Backend):
            return name
        from ..config import normalize_backend

        return cls(normalize_backend(name))

    @property
    def dtype(self) -> Any:
        return np.float64 if self is Backend.FLOAT else object

    @property
    def zero(self) -> ProbValue:
        return 0.0 if self is Backend.FLOAT else Fraction(0)

    @property
    def one(self) -> ProbValue:
        return 1.0 if self is Backend.FLOAT else Fraction(1)

    def parse_token(self, token: str) -> ProbValue:
        """Parse a decimal literal or a ``num/den`` token.

        Decimals are exact in the rational backend (``"0.3"`` is 3/10).

        Raises:
            ValueError: if the token is not a number
        """
        text = token.strip()
        if self is Backend.RATIONAL:
            return Fraction(text)
        if "/" in text:
            return float(Fraction(text))
        value = float(text)
        if not math.isfinite(value):
            raise ValueError(f"non-finite probability {token!r}")
        return value

    def coerce(self, value: Any) -> ProbValue:
        """Convert a Python number or token into this backend's value type."""
        if isinstance(value, str):
            return self.parse_token(value)
        if self is Backend.FLOAT:
            return float(value)
        if isinstance(value, float):
            # shortest round-tripping decimal, so 0.3 becomes 3/10
            return Fraction(repr(value))
        return Fraction(value)

    def array(self, rows: Any) -> np.ndarray:
        """Build an array of this backend's dtype from nested sequences."""
        raw = np.asarray(rows, dtype=object)
        out = np.empty(raw.shape, dtype=self.dtype)
        for idx, value in np.ndenumerate(raw):
            out[idx] = self.coerce(value)
        return out

    def convert(self, values: np.ndarray) -> np.ndarray:
        """Convert an array produced by the other backend."""
        if self is Backend.FLOAT:
            flat = [float(v) for v in values.flat]
            return np.array(flat, dtype=np.float64).reshape(values.shape)
        out = np.empty(values.shape, dtype=object)
        for idx, value in np.ndenumerate(values):
            out[idx] = self.coerce(value)
        return out


def detect_backend(tokens: Iterable[str]) -> Backend:
    """Rational when any token is written as a fraction, float otherwise."""
    return Backend.RATIONAL if any("/" in t for t in tokens) else Backend.FLOAT


def backend_of_values(values: Sequence[Any]) -> Backend:
    """Infer the backend of already-typed values; mixing is an error."""
    kinds = {isinstance(v, Fraction) for v in values if not isinstance(v, str)}
    if kinds == {True, False}:
        raise BackendMismatchError("float and rational values mixed in one table")
    if True in kinds:
        return Backend.RATIONAL
    if any(isinstance(v, str) and "/" in v for v in values):
        return Backend.RATIONAL
    return Backend.FLOAT


def backend_of_array(values: np.ndarray) -> Backend:
    return Backend.RATIONAL if values.dtype == object else Backend.FLOAT


def check_same_backend(*backends: Backend) -> Backend:
    """Return the common backend or raise BackendMismatchError."""
    distinct = set(backends)
    if len(distinct) > 1:
        raise BackendMismatchError(f"cannot mix backends {sorted(b.value for b in distinct)}")
    return backends[0]


def format_value(value: ProbValue) -> str:
    """Render a probability for files and CLI output.

    Rationals are always written ``num/den`` (``0/1``, ``1/1`` included) so a
    re-parse recovers the rational backend; floats use ``repr``.
    """
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (int, np.integer)):
        return f"{int(value)}/1"
    return repr(float(value))


def to_float(value: ProbValue) -> float:
    return float(value)


def values_close(a: ProbValue, b: ProbValue, rel: float = 1e-12, abs_tol: float = 0.0) -> bool:
    """Exact equality for rationals, relative tolerance otherwise."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=abs_tol)
