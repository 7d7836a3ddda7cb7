"""Exception hierarchy shared by every granred module."""


class GranredError(Exception):
    """Base class for all library errors."""


class FormatError(GranredError):
    """Malformed input file."""


class ParameterError(GranredError, ValueError):
    """An argument is outside its valid range."""


class StateError(GranredError):
    """An operation was called on data in the wrong state (e.g. unlabeled rows)."""


class ConfigurationError(GranredError):
    """Required configuration is missing or inconsistent."""


class SplitError(GranredError):
    """A labeled/unlabeled split cannot be built with the requested counts."""
