"""Exception hierarchy shared across the package."""


class FallwatchError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(FallwatchError):
    """Tensor shapes are inconsistent with the operation's contract."""


class InputError(FallwatchError):
    """A value argument is outside its legal domain (labels, fractions, sd, ...)."""


class ConfigurationError(FallwatchError):
    """A configuration value cannot be honored (thresholds, input sizes, ports)."""


class FormatError(FallwatchError):
    """A binary or text payload does not match its declared format.

    ``offset`` is the byte offset of the defect when it is known.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class IngestionError(FallwatchError):
    """A dataset could not be loaded; the message lists the offending entries."""


class TrainingDivergedError(FallwatchError):
    """Training produced a non-finite loss; identifies the epoch and batch."""

    def __init__(self, epoch, batch_index):
        super().__init__(f"non-finite loss in epoch {epoch}, batch {batch_index}")
        self.epoch = epoch
        self.batch_index = batch_index


class ProtocolError(FallwatchError):
    """A wire payload (video fragment, command traffic) violates the protocol."""


class TelemetryParseError(ProtocolError):
    """A telemetry line could not be parsed; ``key`` names the bad field if any."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class TransportError(FallwatchError):
    """A socket-level failure distinct from a plain timeout."""
