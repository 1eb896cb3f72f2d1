"""Exception taxonomy shared across the package."""

from __future__ import annotations


class CoopSqlError(Exception):
    """Base class for every error raised by this package."""


class MergeConflictError(CoopSqlError):
    """Two non-empty schemas with different db_ids cannot be merged."""


class InvalidSelectionError(CoopSqlError):
    """A schema selection references a table or column its source lacks."""


class PartitionError(CoopSqlError):
    """Requested schema partition is infeasible (e.g. more parts than tables)."""


class SqlSyntaxError(CoopSqlError):
    """SQL text failed to parse.

    `position` is the character offset of the offending token, `token_index`
    its 1-based index in the token stream.
    """

    def __init__(self, message: str, position: int = 0, token_index: int = 0):
        super().__init__(message)
        self.position = position
        self.token_index = token_index


class BackendError(CoopSqlError):
    """A reasoner backend failed; `raw` carries whatever the backend returned."""

    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ExtractionFailedError(BackendError):
    pass


class GenerationFailedError(BackendError):
    pass


class UnparseableCompletionError(BackendError):
    """Backend produced output with no extractable SQL."""


class CheckFailedError(BackendError):
    pass


class ReplayMissError(BackendError):
    """Replay cassette has no entry for the requested trace key."""


class InsufficientExamplesError(CoopSqlError):
    """Prompt asked for more few-shot examples than the bank holds."""


class ConfigError(CoopSqlError):
    """Invalid run/episode configuration."""


class DatasetError(CoopSqlError):
    """Dataset files are missing or malformed."""


class UndefinedScoreError(CoopSqlError):
    """Metric is undefined for the given inputs (e.g. zero records)."""
