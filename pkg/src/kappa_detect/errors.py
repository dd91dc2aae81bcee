"""Exception types shared across the package."""


class KappaDetectError(Exception):
    """Base class for all errors raised by this library."""


class InsufficientPointsError(KappaDetectError):
    """An operation needs more points than the cloud provides."""


class DegenerateSecantSetError(KappaDetectError):
    """No usable secants remain after duplicate removal and filtering."""


class DimensionError(KappaDetectError):
    """A target dimension is out of range or ambient dimensions disagree."""


class RankError(KappaDetectError):
    """A matrix expected to have full column rank does not."""


class ProfileMismatchError(KappaDetectError):
    """Two profiles with different dimension ranges were compared."""


class ConfigError(KappaDetectError):
    """An experiment or detection configuration is unsatisfiable."""


class IngestError(KappaDetectError):
    """Base class for delimited-text ingestion failures."""


class RowParseError(IngestError):
    """A row of a delimited file could not be parsed."""

    def __init__(self, path, line_number: int, message: str):
        super().__init__(f"{path}:{line_number}: {message}")
        self.path = path
        self.line_number = line_number


class SchemaError(IngestError):
    """Rows disagree with the declared ingestion schema."""
