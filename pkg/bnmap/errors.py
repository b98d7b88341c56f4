"""Exception hierarchy for bnmap."""

from typing import List, Optional


class BNMapError(Exception):
    """Base class for all bnmap errors."""


class NetworkParseError(BNMapError, ValueError):
    """Malformed BNM/QRY text. Carries the 1-based line number."""

    def __init__(self, message: str, line: Optional[int] = None, suggestion: Optional[str] = None):
        self.line = line
        self.suggestion = suggestion
        text = f"line {line}: {message}" if line is not None else message
        if suggestion:
            text += f" (did you mean {suggestion!r}?)"
        super().__init__(text)


class NetworkValidationError(BNMapError, ValueError):
    """A network that fails validation was used where a valid one is required."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        preview = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"invalid network: {preview}{more}")


class InvalidQueryError(BNMapError, ValueError):
    """Query names unknown variables, bad states, or overlaps MAP and evidence."""


class BackendMismatchError(BNMapError, TypeError):
    """Float and rational values were mixed inside one computation."""


class IncompleteInstantiationError(BNMapError, ValueError):
    """A full instantiation was required but some variables are unassigned."""


class ZeroProbabilityEvidenceError(BNMapError, ArithmeticError):
    """The evidence has probability zero."""


class DecompositionError(BNMapError, ValueError):
    """A decomposition is not valid for the network it is used with."""


class IncomparableCandidatesError(BNMapError, ValueError):
    """Dominance was asked for candidates of different groups or dimensions."""


class OracleGuardError(BNMapError, RuntimeError):
    """Brute-force enumeration would exceed its state-space guard."""


class SolverTimeoutError(BNMapError, TimeoutError):
    """A cooperative deadline expired before the solver finished."""


class GadgetInputError(BNMapError, ValueError):
    """A PARTITION or 2CNF instance cannot be compiled into a gadget."""
