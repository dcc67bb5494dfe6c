class CacheModesError(Exception):
    """Base class for all domain errors raised by the package."""


class InvalidArgument(CacheModesError, ValueError):
    pass


class PolicyViolation(CacheModesError, ValueError):
    """A configuration is not realizable under the chosen caching policy."""


class CapacityError(CacheModesError, RuntimeError):
    """The exact enumeration engine was asked for more permutations than its cap."""


class ConfigError(CacheModesError, ValueError):
    pass
