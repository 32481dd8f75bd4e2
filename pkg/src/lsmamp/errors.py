"""Exception types shared across the package."""


class ModelError(ValueError):
    """A parameter lies outside the domain of a cost expression."""


class GeometryError(ModelError):
    """Level sizes, SST sizes or dataset size do not form the required geometry."""


class InfeasibleError(ModelError):
    """No parameter value satisfies the requested constraint."""


class TraceFormatError(ValueError):
    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
