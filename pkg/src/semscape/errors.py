"""Exception hierarchy shared across the engine.

InputError (and its subclasses) means the caller's data or parameters are
invalid; the CLI maps it to exit code 2. Anything else is a runtime failure
(exit code 1). Every raise site can attach a stable machine code, which the
HTTP service forwards verbatim so each error path maps to exactly one code.
"""


class SemscapeError(Exception):
    """Base class for all engine errors."""

    code = "internal_error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class InputError(SemscapeError):
    """Invalid user-supplied data or parameters."""

    code = "invalid_params"


class FormatError(InputError):
    """Malformed input file. Message carries line number or byte offset."""

    code = "invalid_format"


class NotFoundError(SemscapeError):
    """A referenced dataset, sample, label, or metric does not exist."""

    code = "not_found"
