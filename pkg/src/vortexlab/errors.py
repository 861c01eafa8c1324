"""Exception types shared across the package."""


class VortexLabError(Exception):
    """Base class for errors raised by vortexlab."""


class SingularityError(VortexLabError, ValueError):
    """A singular kernel was evaluated at zero separation."""


class ConfigError(VortexLabError, ValueError):
    """A configuration document failed validation.

    Carries the dotted path of the offending field so command-line
    front ends can point at the exact entry.
    """

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")
