"""Exception types shared across the toolkit."""


class NoiseBenchError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(NoiseBenchError):
    """An input value violates a documented precondition or invariant."""


class FormatError(NoiseBenchError):
    """A file is malformed: bad magic, truncated payload, ragged CSV, ..."""


class IoError(NoiseBenchError):
    """Reading or writing a file failed at the OS level."""


class StratificationError(ValidationError):
    """A class has too few samples to populate every nonzero split."""


class NoiseRateError(ValidationError):
    """Uniform noise rate exceeds the (K-1)/K admissibility bound."""


class ConfigError(NoiseBenchError):
    """Experiment configuration is missing, inconsistent, or unparseable."""


class DivergenceError(NoiseBenchError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
