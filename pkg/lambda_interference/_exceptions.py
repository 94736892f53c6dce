# SPDX-FileCopyrightText: © 2024 The lambda-interference Authors
# SPDX-License-Identifier: Apache-2.0

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DegenerateLabelingError",
    "EstimateError",
    "GridMismatchError",
    "NumericError",
    "SpectrumShapeError",
    "TimeTagFormatError",
]


class ConfigError(Exception):
    """Errors related to the run configuration."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


class NumericError(Exception):
    """Errors related to a numeric evaluation or an estimate."""


class DegenerateLabelingError(NumericError):
    """Two dressed states claim the same bare state."""


class ConvergenceError(NumericError):
    """Errors related to iterative solvers not converging."""


class GridMismatchError(NumericError):
    """Errors related to spectra sampled on incompatible grids."""


class SpectrumShapeError(NumericError):
    """Errors related to spectra without a well-defined half maximum."""


class EstimateError(NumericError):
    """Errors related to undefined correlation or heralding estimates."""


class TimeTagFormatError(Exception):
    """Errors related to reading a binary time-tag file."""
