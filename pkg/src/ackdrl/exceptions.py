"""Exception hierarchy shared across the package."""


class AckDRLError(Exception):
    """Base class for all package errors."""


class ConfigError(AckDRLError, ValueError):
    """Invalid configuration value. ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ShapeError(AckDRLError, ValueError):
    pass


class InvalidActionError(AckDRLError, ValueError):
    pass


class InvalidStateError(AckDRLError, RuntimeError):
    pass


class WorldGenerationError(AckDRLError, RuntimeError):
    pass


class SamplingError(AckDRLError, RuntimeError):
    pass


class NotReadyError(AckDRLError, RuntimeError):
    """Replay buffer holds fewer transitions than the requested batch."""


class FormatError(AckDRLError, ValueError):
    """Malformed file. ``offset`` (bytes) or ``line`` locate the problem when known."""

    def __init__(self, message, offset=None, line=None, section=None):
        self.offset = offset
        self.line = line
        self.section = section
        where = []
        if section is not None:
            where.append(f"section {section!r}")
        if offset is not None:
            where.append(f"offset {offset}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class AlgorithmMismatchError(FormatError):
    pass
