"""Exception hierarchy shared across the engine."""


class DeltalogError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(DeltalogError):
    pass


class DomainError(DeltalogError):
    """A constant fell outside the active domain (closed-world violation)."""


class RelationSizeError(DeltalogError):
    pass


class DeltaError(DeltalogError):
    """Malformed change value, e.g. overlapping adds and removes."""


class LawCheckError(DeltalogError):
    pass


class ParseError(DeltalogError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message)


class ProgramError(DeltalogError):
    """Static check failure: arity conflicts, unsafe variables, bad strata."""


class StratificationError(ProgramError):
    def __init__(self, message, cycle=()):
        self.cycle = tuple(cycle)
        super().__init__(message)


class SafetyError(ProgramError):
    pass


class EvaluationError(DeltalogError):
    pass


class DivergenceError(DeltalogError):
    def __init__(self, message, last=None):
        self.last = last
        super().__init__(message)


class SoundnessError(DeltalogError):
    """Internal consistency check failed; indicates an engine bug."""


class NonConvergenceError(DivergenceError):
    pass
