"""Exception hierarchy for certified-bound failures.

Every error that can invalidate a certificate gets its own class so callers
(and the CLI exit-code mapping) can react precisely.
"""


class TransferOpError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(TransferOpError):
    """Operands live in different complex dimensions."""


class UnsupportedDomainError(TransferOpError):
    """Operation requires a strictly circled domain (or other shape constraint)."""


class DegenerateScalingError(TransferOpError):
    """A scaling factor is <= 1 (or within 1e-6 of 1), so bounds collapse."""


class InvalidCoverError(TransferOpError):
    """A relative-cover containment condition failed or could not be verified.

    Attributes:
        condition: 'a' (covering) or 'b' (scaled containment).
        piece: index of the offending piece, or None for condition (a).
    """

    def __init__(self, message, condition=None, piece=None):
        super().__init__(message)
        self.condition = condition
        self.piece = piece


class SearchFailureError(TransferOpError):
    """auto_cover found no valid cover within the granularity limit."""


class PoleError(TransferOpError):
    """Evaluation hit (or could not exclude) a pole of a map or weight."""


class EnclosureFailureError(TransferOpError):
    """A rigorous image enclosure could not be produced (pole inside disk)."""


class NotCompactlyContainedError(TransferOpError):
    """A required compact containment has non-positive certified margin."""


class PrecisionFailureError(TransferOpError):
    """Iterative refinement stalled above its target tolerance."""


class SingularMultiplierError(TransferOpError):
    """det(I - phi'(z*)) enclosure contains 0; the trace term is undefined."""


class BudgetExceededError(TransferOpError):
    """Word enumeration would exceed the configured budget.

    Attributes:
        max_feasible: largest trace order that stays within budget, if known.
    """

    def __init__(self, message, max_feasible=None):
        super().__init__(message)
        self.max_feasible = max_feasible


class ConfigurationError(TransferOpError):
    """Invalid run configuration or violated pipeline precondition."""


class DivergentTailError(TransferOpError):
    """The certified tail sum diverged; increase the order or shrink |zeta|."""


class OracleFailureError(TransferOpError):
    """The non-rigorous oracle could not produce a result."""
