"""Exception hierarchy shared by the parisian modules."""


class ParisianError(Exception):
    """Base class for all errors raised by this package."""


class OracleRangeError(ParisianError, ValueError):
    """Quadrature oracle cannot resolve the requested frequency within budget."""


class NotDissociateError(ParisianError, ValueError):
    """Signed sums of a sequence prefix are not pairwise distinct."""


class StageError(ParisianError, ValueError):
    """A construction stage cannot be built from the given parameters."""


class ScaleBracketError(ParisianError, ValueError):
    """Interval length falls outside the stage bracket [1/N_k, 1/N_{k-1})."""


class SelectionError(ParisianError, RuntimeError):
    """Base class for failures of the frequency-selection induction."""


class ShiftSearchError(SelectionError):
    """No coefficient above threshold was found within the search radius."""


class VanishingCoefficientError(SelectionError):
    """A coefficient of the current sign-pattern table is numerically zero."""


class NoAdmissibleCandidateError(SelectionError):
    """The candidate pool ran out before the perturbation bound was met."""


class VerificationError(SelectionError):
    """A freshly computed coefficient fell below the guaranteed bound."""


class WindowError(ParisianError, ValueError):
    """A candidate frequency violates the window hypothesis on the support."""
