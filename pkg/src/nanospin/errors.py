"""Exception and warning types shared across the package."""


class NanospinError(Exception):
    """Base class for all library errors."""


class DomainError(NanospinError, ValueError):
    """An argument lies outside the domain of the model."""


class ModelValidityError(DomainError):
    """Inputs violate the small-displacement assumption of a field model."""


class ForbiddenTransitionError(DomainError):
    """The requested pair of magnetic sublevels is not a Δm = ±1 transition."""


class OutOfScopeTransitionError(ForbiddenTransitionError):
    """Δm = 0 (hyperfine-changing) channel, which is not modelled."""


class UnsupportedSourceError(DomainError):
    """The coupling source has no meaning for the requested quantity."""


class TruncationError(NanospinError):
    """The Fock-space truncation is too small for the requested state."""

    def __init__(self, message, suggested_n_max=None):
        super().__init__(message)
        self.suggested_n_max = suggested_n_max


class NumericalError(NanospinError, ArithmeticError):
    """A numerical routine failed to converge within its budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SingularPointError(DomainError):
    """Field evaluated on a line-current axis."""


class SearchError(NanospinError):
    """No interior field minimum inside the search box."""


class ModelValidityWarning(UserWarning):
    """Displacement amplitude is large enough that first-order models degrade."""


class LeakageWarning(UserWarning):
    """Population sits on the truncation edge of the Fock ladder."""


class LZValidityWarning(UserWarning):
    """Sweep too short for the asymptotic Landau-Zener formula."""


class UntrappableStateWarning(UserWarning):
    """Potential evaluated for a state with m_F g_F <= 0."""
