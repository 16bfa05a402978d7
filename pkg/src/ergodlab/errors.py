"""Error taxonomy shared across modules; the CLI maps these to exit codes."""


class ConfigError(ValueError):
    """Malformed or inconsistent user configuration (CLI exit code 2)."""


class ResourceLimitError(RuntimeError):
    """A documented size cap was exceeded (CLI exit code 3)."""
