"""Exception types shared across the package."""


class TheoremViolation(RuntimeError):
    """A finite-depth check contradicts what the theory guarantees.

    Raised (or reported) when e.g. the overlap of the two preimage
    components comes out empty for a validated configuration. It almost
    always means the parameters or the depth are wrong.
    """


class DepthCapExceeded(RuntimeError):
    pass


class LiftError(ValueError):
    """A backward lift left the region where it is certified."""


class EscapeError(LiftError):
    pass


class MembershipError(LiftError):
    pass


class PrecisionError(ArithmeticError):
    pass


class PressureError(ValueError):
    """Root finding on a pressure function is not licensed (no sign change, not monotone)."""
