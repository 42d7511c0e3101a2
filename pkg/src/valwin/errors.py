"""Exception types shared across the library."""


class ValwinError(Exception):
    """Base class for all library errors."""


class StructureError(ValwinError):
    """Objects from incompatible groups, rings or windows were mixed."""


class DefinitionError(ValwinError):
    """An object violates its own construction contract (bad weights,
    non-terminating rewrite system, denominator bound exceeded, ...)."""


class PrecisionError(ValwinError):
    """A requested certificate cannot be produced at the current precision.

    Carries an optional hint describing the precision that would suffice.
    """

    def __init__(self, message, hint=None):
        super().__init__(message if hint is None else f"{message} (hint: {hint})")
        self.hint = hint


class ConfigError(ValwinError):
    """A job configuration failed schema validation."""
