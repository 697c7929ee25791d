"""Exception hierarchy shared by all modules."""


class GecCombineError(Exception):
    pass


class M2ParseError(GecCombineError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class AlignmentError(GecCombineError, ValueError):
    pass


class OverlapError(GecCombineError, ValueError):
    """Edits handed to :func:`apply_edits` overlap; resolve conflicts first."""


class ConstraintViolationError(GecCombineError, ValueError):
    """A selection matrix breaks the one-system-per-type or binarity constraint."""


class UnknownTypeError(GecCombineError, KeyError):
    pass


class SolverError(GecCombineError):
    pass


class CapacityError(SolverError):
    pass


class NonConvergenceError(SolverError):
    def __init__(self, message, last_lambda=None):
        self.last_lambda = last_lambda
        super().__init__(message)
