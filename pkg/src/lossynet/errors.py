"""Exception hierarchy shared by the simulator, config loader and CLI."""


class LossyNetError(Exception):
    """Base class for every error raised by this package."""

    def __init__(self, message: str, *, element: str | None = None, path: str | None = None):
        super().__init__(message)
        self.element = element
        self.path = path


class ModeError(LossyNetError):
    """A mode is unknown to the registry or used with the wrong kind."""


class RegistryMismatchError(LossyNetError):
    pass


class WriteOnceError(LossyNetError):
    """An environment mode would be consumed or written by a second element."""


class PhotonCapError(LossyNetError):
    pass


class BasisTooLargeError(LossyNetError):
    pass


class PhysicalityError(LossyNetError):
    """Element coefficients do not describe a physical lossy beam splitter."""


class NormalizationError(PhysicalityError):
    pass


class UnphysicalAbsorberError(PhysicalityError):
    """The absorber Gram matrix would not be positive semidefinite."""


class NoAbsorberError(LossyNetError):
    pass


class ConfigError(LossyNetError):
    pass


class InvariantViolation(LossyNetError):
    """A numerical invariant (norm, completeness) failed beyond tolerance."""
