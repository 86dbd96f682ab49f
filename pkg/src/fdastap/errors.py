"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError`; everything caused by
bad input (parameters, scene, config file) derives from :class:`ConfigError`.
The CLI maps the two families to distinct exit codes.
"""


class FdaStapError(Exception):
    pass


class ConfigError(FdaStapError, ValueError):
    pass


class NumericalError(FdaStapError, ArithmeticError):
    pass


class NonCoprime(ConfigError):
    pass


class BadOrder(ConfigError):
    pass


class BadScene(ConfigError):
    pass


class BadBandwidth(ConfigError):
    pass


class UnsupportedSpacing(ConfigError):
    pass


class RankTooLarge(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class Empty(ConfigError):
    pass


class NotPSD(NumericalError):
    pass


class SingularGram(NumericalError):
    pass


class SingularCore(NumericalError):
    pass


class Singular(NumericalError):
    pass
