"""Exception hierarchy shared by the numerical modules and the CLI."""


class DiscordError(Exception):
    """Base class for every domain error (CLI exit code 1)."""


class InvalidStateError(DiscordError):
    """
    A matrix failed density-matrix validation.
    `violations` lists every violated invariant as (name, magnitude).
    """

    def __init__(self, message, magnitude=None, violations=None):
        super().__init__(message)
        self.magnitude = magnitude
        self.violations = list(violations or [])


class NotHermitian(InvalidStateError):
    pass


class TraceNotOne(InvalidStateError):
    pass


class NotPSD(InvalidStateError):
    pass


class NotUnitary(DiscordError):
    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class NotCS(DiscordError):
    pass


class NotX(DiscordError):
    pass


class InvalidXState(DiscordError):
    pass


class TooLarge(DiscordError):
    pass


class NoSignChange(DiscordError):
    pass


class ConfigError(Exception):
    """Bad configuration value (CLI exit code 2, like a usage error)."""
