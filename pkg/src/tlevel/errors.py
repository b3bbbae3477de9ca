"""Shared exception types, mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid user-supplied configuration or parameters (exit code 2)."""


class GuardError(RuntimeError):
    """An enumeration or size guard was exceeded (exit code 3)."""
