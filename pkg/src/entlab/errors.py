"""Shared exception types."""


class BudgetError(RuntimeError):
    """An enumeration, atom, or size budget was exceeded."""


class SearchBudgetError(RuntimeError):
    """The exact solver exhausted its node budget before finishing."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
