"""Exception hierarchy shared by every module of the lab."""


class KljnLabError(Exception):
    """Base class for all errors raised by kljn_lab."""


class InvalidArgument(KljnLabError, ValueError):
    pass


class DegenerateInput(KljnLabError, ValueError):
    """A signal with zero RMS (or otherwise unusable) was supplied."""


class UnphysicalConfiguration(KljnLabError, ValueError):
    """Derived mean-square level or temperature is not positive."""


class SingularConfiguration(KljnLabError, ValueError):
    """A resistor combination makes a formula denominator vanish."""


class InconsistentKnowledge(KljnLabError):
    """Eve's hypotheses are all contradicted by the measured data."""


class ClassificationError(KljnLabError):
    """A measured quantity cannot be mapped to any bit situation."""


class ValidationError(KljnLabError, ValueError):
    """An experiment specification is incomplete or malformed."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)
