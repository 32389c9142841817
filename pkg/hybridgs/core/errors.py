"""
Exception hierarchy for the HybridGS codec.

Every error carries the process exit code the CLI reports for it and an
optional pipeline stage label set by `hybridgs.services.pipeline_service.stage`.
"""
from typing import Optional


class HgsError(Exception):
    """Root of all codec errors."""
    exit_code: int = 1

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.stage = stage

    def __str__(self) -> str:
        if self.stage:
            return f"[{self.stage}] {self.message}"
        return self.message


# Configuration (exit 2)

class ConfigError(HgsError, ValueError):
    """Invalid option, environment variable or encode configuration."""
    exit_code = 2


# Data errors (exit 3)

class DataError(HgsError, ValueError):
    """Input data violates a precondition."""
    exit_code = 3


class InputFileError(DataError):
    """Input file is missing or unreadable."""


class ParseError(DataError):
    """Malformed PLY header or camera file."""


class SchemaError(DataError):
    """Required PLY element or property is missing."""


class RangeError(DataError):
    """Value lies outside the declared quantization or lattice range."""


class DegenerateRangeError(DataError):
    """Quantization range collapses to a single value."""


class CodeError(DataError):
    """Quantization code lies outside [0, 2^N - 1]."""


class SingularFitError(DataError):
    """Ridge normal equation has a zero denominator."""


class InsufficientPointsError(DataError):
    """Too few points for the requested neighborhood size."""


class InsufficientDataError(DataError):
    """Too few rows for a statistical fit."""


class DegenerateCloudError(DataError):
    """All positions coincide, so the cloud cannot be normalized."""


class PruneAllError(DataError):
    """Pruning would remove every primitive."""


class ScheduleError(DataError):
    """Pruning schedule time marks are inconsistent."""


class DivergenceError(DataError):
    """Latent fit produced a non-finite loss."""


class ShapeError(DataError):
    """Array shapes do not line up."""


class DuplicateError(DataError):
    """Geometry contains repeated voxels."""


class VerificationError(DataError):
    """Round-trip self-check found a mismatch."""


class ConsistencyError(DataError):
    """Bitstream components disagree with each other."""

    def __init__(self, field: str, message: str, stage: Optional[str] = None):
        super().__init__(f"{field}: {message}", stage)
        self.field = field


# Rate control (exit 4)

class InfeasibleRateError(HgsError):
    """Target size cannot be reached with the allowed controls."""
    exit_code = 4


# Stream integrity (exit 5)

class CorruptStreamError(HgsError):
    """Bitstream is truncated or malformed."""
    exit_code = 5
