"""Exception hierarchy shared by all renewalkit modules."""


class RenewalKitError(Exception):
    """Base class for every error raised on purpose by this package."""


class DegenerateSupport(RenewalKitError):
    """The affine hull of a support has dimension smaller than the ambient one."""


class NotApplicable(RenewalKitError):
    """A precondition of a computation (e.g. ``d > alpha``) is not met."""


class QuadratureBudgetExceeded(RenewalKitError):
    pass


class BoxTooSmall(RenewalKitError):
    """Certified truncation loss of an exact convolution exceeds the tolerance."""


class BudgetExceeded(RenewalKitError):
    pass


class MonteCarloBudget(RenewalKitError):
    """Monte Carlo error bars are too wide for the requested diagnostic."""


class UnknownTail(RenewalKitError):
    pass


class SpecInvalid(RenewalKitError):
    pass


class DigestMismatch(RenewalKitError):
    def __init__(self, path, expected, actual):
        super().__init__(f"digest mismatch for {path}: expected {expected}, got {actual}")
        self.path = path
        self.expected = expected
        self.actual = actual
