"""Exception hierarchy shared by every ecgwave module."""


class EcgWaveError(Exception):
    """Base class for all errors raised by ecgwave."""


class ValidationError(EcgWaveError, ValueError):
    """Input data or arguments violate a documented precondition."""


class ParseError(ValidationError):
    """A CSV file could not be parsed.

    ``line`` is the 1-based line number of the offending row, when known.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class UnsupportedWaveletError(ValidationError):
    """Requested wavelet name is not in the built-in table."""


class SpecError(ValidationError):
    """A model specification names an unknown kind or hyperparameter."""


class NotFittedError(EcgWaveError, AttributeError):
    """Estimator used before ``fit``."""


class ModelFormatError(EcgWaveError):
    """A saved model file is truncated, corrupt or not a model file."""


class ModelVersionError(ModelFormatError):
    """A saved model file has an unsupported format version."""
