"""Exception types raised by the package."""


class ObstacleError(Exception):
    """Base class for all package errors."""


class EmptyMask(ObstacleError, ValueError):
    """An operation needed a set of positive area and got an empty one."""


class NegativeTime(ObstacleError, ValueError):
    pass


class BadContainment(ObstacleError, ValueError):
    """Inner set of a bump is not compactly contained in the outer set."""


class NotNondegenerate(ObstacleError, ValueError):
    pass


class SequenceExhausted(ObstacleError, RuntimeError):
    pass


class NegativityBreach(ObstacleError, FloatingPointError):
    """A time step produced a negative value below round-off level."""


class UnknownScenario(ObstacleError, KeyError):
    pass


class WrongRegime(ObstacleError, ValueError):
    pass


class ConfigError(ObstacleError, ValueError):
    pass
