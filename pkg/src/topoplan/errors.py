"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: ``ValidationError`` and its
subclasses exit 2, ``UnreachablePlanError`` exits 3, everything else exits 1.
"""


class TopoplanError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TopoplanError):
    """Bad input: malformed records, violated preconditions, bad arguments."""


class SchemaError(ValidationError):
    """A file or wire payload does not match its declared schema."""


class FrameMismatchError(ValidationError):
    """Operands carry different coordinate frames."""


class UnknownLandmarkError(ValidationError):
    """A landmark label is absent from the relevant vocabulary or matrix."""


class UnitMismatchError(ValidationError):
    """Lengths tagged with incompatible units were combined."""


class EmptyExtractionError(ValidationError):
    """Instruction parsing produced no landmarks; callers should fall back."""


class BudgetError(ValidationError):
    """An exhaustive-search request exceeds its enumeration budget."""


class GenerationError(ValidationError):
    """A synthetic-world spec cannot be satisfied."""


class ContractError(TopoplanError):
    """An operation was invoked on data violating its documented contract."""


class UnreachablePlanError(TopoplanError):
    """No walk can satisfy the planning query on this graph."""


class RemoteError(TopoplanError):
    """A remote adapter failed after exhausting retries."""

    def __init__(self, message: str, status: int | None = None, body: str | None = None):
        super().__init__(message)
        self.status = status
        self.body = body


class CompletionParseError(RemoteError):
    """A language-model completion could not be parsed; carries the raw text."""

    def __init__(self, message: str, completion: str):
        super().__init__(message)
        self.completion = completion
