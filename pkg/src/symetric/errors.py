"""Exception hierarchy. ValidationError maps to CLI exit code 1, NumericError to 2."""


class SymetricError(Exception):
    pass


class ValidationError(SymetricError):
    """Bad inputs, dimensions, parameters, or configuration."""


class DimensionError(ValidationError):
    pass


class ParameterError(ValidationError):
    pass


class FormatError(ValidationError):
    """Malformed container or report file. Carries a byte offset where known."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DataRequirementError(ValidationError):
    pass


class ExpansionTooLargeError(ValidationError):
    pass


class NumericError(SymetricError):
    """Numerical failure: divergence, singularity, degenerate data."""


class DivergenceError(NumericError):
    pass


class SingularityError(NumericError):
    pass


class DegenerateLatentError(NumericError):
    pass
