"""
Error Types

Every failure the toolkit reports carries a machine-readable ``kind`` so the
CLI can emit it as JSON.
"""

from typing import Dict, Optional


class ToolkitError(ValueError):
    """Base class for all toolkit errors."""

    kind = "error"

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict:
        return {"error": self.kind, "message": self.message, "details": self.details}


class InvalidArgumentError(ToolkitError):
    kind = "invalid-argument"


class UnsupportedDimensionError(ToolkitError):
    kind = "unsupported-dimension"


class UndersampledError(ToolkitError):
    kind = "undersampled"


class CoverageError(ToolkitError):
    kind = "coverage-error"


class UnsupportedOrderError(ToolkitError):
    kind = "unsupported-order"


class BelowMeanError(ToolkitError):
    kind = "below-mean"


class InsufficientSamplesError(ToolkitError):
    kind = "insufficient-samples"


class ConfigError(ToolkitError):
    kind = "config-error"


class NumericsError(ToolkitError):
    """An internal cross-check between two computations disagreed."""

    kind = "numerics-error"
