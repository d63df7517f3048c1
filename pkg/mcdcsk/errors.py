"""Exception hierarchy shared by the library, the CLI and the HTTP API."""


class McdcskError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code = 1


class ConfigurationError(McdcskError, ValueError):
    """Invalid system parameters, channel profiles or run specifications."""

    exit_code = 2


class DomainError(McdcskError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2


class DimensionError(McdcskError, ValueError):
    """Array shapes do not match the frame geometry."""

    exit_code = 2


class NumericalError(McdcskError, ArithmeticError):
    """A computation collapsed or produced non-finite values."""

    exit_code = 3
