"""Exception hierarchy shared by the solvers, the verifier and the CLI."""


class SharpConstError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SharpConstError, ValueError):
    """Arguments outside the domain where a formula or problem is defined."""


class NoFiniteConstantError(DomainError):
    """The inequality admits no finite (or no positive) constant."""


class ConstructionError(SharpConstError, ValueError):
    """A weight, problem or test field could not be built as requested."""


class InadmissibleFieldError(SharpConstError, ValueError):
    """A test field violates the admissibility predicate of a case."""


class ConvergenceError(SharpConstError, RuntimeError):
    """A numerical procedure did not reach its tolerance.

    The best available estimate is kept on the exception so callers can
    still report it.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class QuadratureError(ConvergenceError):
    """Adaptive quadrature exhausted its evaluation budget."""


class ToleranceNotMetError(ConvergenceError):
    """Mesh refinement did not bring the eigenvalue error below tolerance."""
