"""Exception types shared across the package."""


class NeuroradarError(Exception):
    """Base class for all package errors."""


class ValidationError(NeuroradarError, ValueError):
    """A parameter or input violated its documented range or contract."""


class AliasingError(NeuroradarError, ValueError):
    """Trajectory Doppler content exceeds half the simulation rate."""


class EncodingError(NeuroradarError, ValueError):
    """Encoder rejected the input signal.

    Carries the index of the offending sample when applicable.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class ContractError(NeuroradarError, ValueError):
    """Caller violated an API precondition (unsorted stream, bad shape, ...)."""


class ConfigError(NeuroradarError, ValueError):
    """Incompatible configuration values."""


class InsufficientDataError(NeuroradarError, ValueError):
    """Input too short for the requested transform."""


class FormatError(NeuroradarError, ValueError):
    """A binary file failed to parse. ``offset`` names the offending byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SizeBudgetError(NeuroradarError, ValueError):
    """Serialized model exceeds its byte budget."""

    def __init__(self, message: str, size: int):
        super().__init__(message)
        self.size = size


class QuantizationQualityError(NeuroradarError, ValueError):
    """Quantized model lost too much accuracy versus the float model."""


class TrainingDivergedError(NeuroradarError, RuntimeError):
    """Loss became non-finite during training. Carries the epoch."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch
