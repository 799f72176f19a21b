"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """A parameter lies outside the range the computation supports."""


class TurningRegionError(DomainError):
    """A WKB seed was requested at a point inside the classically allowed region."""


class IntegrationError(RuntimeError):
    """The integrator ran out of steps before reaching the end of the path.

    ``state`` holds the last state reached so callers can inspect how far it got.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class RefinementError(RuntimeError):
    """Secant refinement of a bracket failed to converge."""

    def __init__(self, message, bracket=None, last=None):
        super().__init__(message)
        self.bracket = bracket
        self.last = last


class EigenSolverError(RuntimeError):
    """Dense eigensolver failed to converge."""
