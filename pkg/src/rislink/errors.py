"""Exception types shared across the package.

The CLI maps these onto exit codes, so library code should raise one of
them (or a subclass) rather than bare ValueError/RuntimeError.
"""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class ConfigError(ValueError):
    """A configuration document or CLI argument set is invalid."""
