"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: input/validation problems exit with 2,
numerical failures with 3.
"""


class CuecheckError(Exception):
    """Base class for all toolkit errors."""


class CorpusFormatError(CuecheckError):
    """A dataset file could not be parsed or violates its schema."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({loc})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(CuecheckError):
    """Inputs are structurally valid but violate a contract (coverage gaps,
    incomplete pairings, bad parameter ranges)."""


class MirrorAmbiguityError(ValidationError):
    """A mirror pairing cannot be decided because several candidates share
    identical alternatives."""

    def __init__(self, message, ids=()):
        super().__init__(message)
        self.ids = tuple(ids)


class TrainingDivergedError(CuecheckError):
    """Training produced a non-finite loss. Carries the last finite state."""

    def __init__(self, message, last_model=None, log=None):
        super().__init__(message)
        self.last_model = last_model
        self.log = log
