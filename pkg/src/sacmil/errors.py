"""Exception hierarchy shared by every module.

The CLI maps ``ContractError``/``ConfigError`` to exit code 1 and
``OSError``/``BagIOError`` to exit code 2.
"""


class SacMilError(Exception):
    """Base class for all package errors."""


class ContractError(SacMilError, ValueError):
    """A precondition on arguments was violated."""


class ConfigError(ContractError):
    """An invalid model/run configuration."""


class DimensionError(ContractError):
    """Array extents do not line up."""


class UndefinedMetricError(ContractError):
    """A metric is undefined for the given input (e.g. single-class AUC)."""


class BagIOError(SacMilError, OSError):
    """Malformed bag file on disk."""


class BagFormatError(BagIOError):
    """Bad magic, version or header field."""


class BagLengthError(BagIOError):
    """Payload length disagrees with the header."""
