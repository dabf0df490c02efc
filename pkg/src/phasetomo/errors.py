"""Exception hierarchy shared by all modules."""


class PhaseTomoError(Exception):
    """Base class for library errors."""


class TruncationError(PhaseTomoError):
    """The Fock dimension needed for the requested tail exceeds the policy cap."""


class DensityError(PhaseTomoError):
    """An operator flagged as a density state violates a density invariant."""


class QuadratureError(PhaseTomoError):
    """A Fourier quadrature failed to converge; carries diagnostics."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class OutOfClassError(PhaseTomoError):
    """A conversion was requested outside the implemented closed class."""

    def __init__(self, message, rule=""):
        super().__init__(message)
        self.rule = rule


class PreconditionError(PhaseTomoError):
    """Inputs violate an operation's preconditions (e.g. non-orthogonal states)."""
