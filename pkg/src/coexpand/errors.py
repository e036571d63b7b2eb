"""Exception types shared across the pipeline."""


class DataError(Exception):
    """Unrecoverable problem with input data (missing file, bad schema, broken invariant)."""


class UsageError(Exception):
    """Invalid command-line usage or configuration."""
