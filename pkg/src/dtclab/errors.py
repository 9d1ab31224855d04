"""Exception types shared across the package."""


class DtcLabError(Exception):
    """Base class for all package errors."""


class DimensionError(DtcLabError, ValueError):
    """Operands act on different Hilbert-space dimensions."""


class SizeCapError(DtcLabError, ValueError):
    """A hard system-size cap was exceeded."""


class SiteIndexError(DtcLabError, IndexError):
    """Site index outside [1, L]."""


class ConfigError(DtcLabError, ValueError):
    """Invalid scenario or run configuration."""


class IntegrationError(DtcLabError, RuntimeError):
    """Time integration failed to converge."""
