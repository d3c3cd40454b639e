"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage/config problems exit 1, bad or
missing input data exits 2, and violated internal invariants exit 3.
"""

from __future__ import annotations


class FlowmineError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FlowmineError):
    """Invalid run configuration or command usage."""


class DataError(FlowmineError):
    """Input data is missing, malformed, or inconsistent."""


class FlowFileError(DataError):
    """A flow file failed to parse or validate."""


class CheckpointError(DataError):
    """A model checkpoint is corrupt, truncated, or incompatible."""


class VocabMismatchError(CheckpointError):
    """Checkpoint was trained against a different vocabulary."""


class InternalError(FlowmineError):
    """An internal invariant was violated (e.g. non-finite gradients)."""
