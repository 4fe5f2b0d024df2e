"""Exception hierarchy shared by every engine."""


class ExrouterError(Exception):
    """Base class for all package errors."""


class ValidationError(ExrouterError, ValueError):
    """A network description violates its invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid network")


class NoActiveReceiver(ExrouterError):
    pass


class NotSymmetric(ExrouterError, ValueError):
    pass


class IndexOutOfRange(ExrouterError, IndexError):
    pass


class LengthMismatch(ExrouterError, ValueError):
    pass


class UnsortedSites(ExrouterError, ValueError):
    pass


class NoPeak(ExrouterError):
    pass


class TooLarge(ExrouterError):
    pass


class NoResonance(ExrouterError):
    pass


class OutOfBand(ExrouterError, ValueError):
    pass


class WrongWireFamily(ExrouterError, ValueError):
    """Operation only defined for wires of length 3l + 2."""


class ConvergenceFailure(ExrouterError):
    pass
