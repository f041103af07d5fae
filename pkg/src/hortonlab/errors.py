"""Typed errors raised across hortonlab.

Every error carries a short machine-readable ``code`` so the command line
front end can report which failure occurred.
"""


class HortonError(Exception):
    code = "HORTON_ERROR"


class ValidationError(HortonError, ValueError):
    """Bad input detected before any work is done (exit code 1)."""

    code = "VALIDATION_ERROR"


class EmptyTreeError(ValidationError):
    code = "EMPTY_TREE"


class NodeNotFoundError(ValidationError, IndexError):
    code = "NODE_NOT_FOUND"


class NegativeParamError(ValidationError):
    code = "NEGATIVE_PARAM"


class NonpositiveKError(ValidationError):
    code = "NONPOSITIVE_K"


class NonIntegerMeanError(ValidationError):
    code = "NONINTEGER_MEAN"


class OutOfDomainError(ValidationError):
    code = "OUT_OF_DOMAIN"


class NewickSyntaxError(ValidationError):
    code = "SYNTAX_ERROR"

    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class NotFullBinaryError(ValidationError):
    code = "NOT_FULL_BINARY"

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} at byte offset {offset}"
        super().__init__(message)
        self.offset = offset


class NoRootInDomainError(HortonError):
    code = "NO_ROOT_IN_DOMAIN"


class HortonOverflowError(HortonError, OverflowError):
    code = "OVERFLOW"


class TreeTooLargeError(HortonError):
    code = "TREE_TOO_LARGE"
