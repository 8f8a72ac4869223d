"""Exception types shared across the package."""


class StaveError(Exception):
    """Base class for every error this package raises deliberately."""


class FrameError(StaveError):
    """A CAN frame field violates its structural constraints."""


class IdentifierError(StaveError):
    """A value does not fit the 29-bit extended identifier space."""


class AddressError(StaveError):
    """Identifier fields are inconsistent or out of range."""


class SignalError(StaveError):
    """A payload signal access falls outside the frame or its raw range."""


class ConfigurationError(StaveError):
    """A component was wired up with conflicting or unknown settings."""


class SimulationError(StaveError):
    """An operation is not legal in the simulation's current state."""


class TimeReversalError(SimulationError):
    """Attempt to run or schedule into the past."""


class ArbitrationCollisionError(SimulationError):
    """Two distinct nodes contended with identical identifiers."""


class DecapsulationError(StaveError):
    """A received radio packet failed verification and was dropped."""


class FramingError(DecapsulationError):
    """Sync bytes or structural flags are wrong."""


class LengthError(DecapsulationError):
    """Packet too short, or its length fields disagree with the buffer."""


class IntegrityError(DecapsulationError):
    """CRC mismatch over the protected region."""


class CaptureError(StaveError):
    """Base for capture log format violations."""


class ParseError(CaptureError):
    """A capture log line does not match the grammar."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class MonotonicityError(CaptureError):
    """Timestamps in a capture log went backwards."""


class BaselineError(StaveError):
    """Differential analysis was given an empty baseline capture."""


class ScenarioValidationError(StaveError):
    """One or more scenario fields failed validation.

    The full list of messages (each prefixed with a field path) is kept
    on ``errors`` so callers can report everything at once.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
