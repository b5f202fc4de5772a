"""Shared exception types."""


class GuardError(RuntimeError):
    """A computation was refused because it exceeds a documented size guard."""
