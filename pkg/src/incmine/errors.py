"""Shared exception base so the CLI can map domain failures to one exit code."""


class IncmineError(Exception):
    """Base class for all data/domain errors raised by this package."""
