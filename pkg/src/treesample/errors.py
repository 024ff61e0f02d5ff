"""Exception types shared by the library and the CLI."""


class TreeSampleError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TreeSampleError):
    """Invalid configuration document or invalid construction parameters."""


class DomainError(TreeSampleError):
    """Operation preconditions unmet: invalid inputs or hypotheses that the
    requested result does not cover."""


class CapExceededError(TreeSampleError):
    """A configured resource guardrail would be exceeded."""
