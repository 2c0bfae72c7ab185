"""
Error hierarchy. Each class maps to one CLI exit code.
"""


class PickandsLabError(Exception):
    """Base class for laboratory errors."""

    exit_code = 1


class ConfigError(PickandsLabError, ValueError):
    """An argument lies outside the domain of the requested operation."""

    exit_code = 2


class NumericalError(PickandsLabError, RuntimeError):
    """Factorization, embedding or quadrature failed."""

    exit_code = 3


class ReliabilityError(PickandsLabError):
    """A report carries a reliability flag and the run is strict."""

    exit_code = 4
