"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A model or solver parameter is outside its allowed range."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class DomainError(ValueError):
    """A closed-form expression was evaluated outside its domain."""


class BranchMergeError(ValueError):
    """The two polariton branches merge (negative discriminant)."""

    def __init__(self, discriminant, message=None):
        super().__init__(message or f"branch merge: discriminant {discriminant:.6g} < 0")
        self.discriminant = discriminant


class BracketError(ValueError):
    """Endpoints supplied to a bracketing search do not straddle a transition."""


class NumericFailure(RuntimeError):
    """An iterative or quadrature routine failed to converge."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
