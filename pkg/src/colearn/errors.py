class ColearnError(Exception):
    pass


class DimensionError(ColearnError, ValueError):
    """Weight and feature vectors disagree in length."""


class DegenerateDeltaError(ColearnError, ArithmeticError):
    """A PA step was requested with an all-zero feature difference."""


class ConfigError(ColearnError, ValueError):
    pass


class InvalidSolutionError(ColearnError, ValueError):
    pass


class UnsupportedRuleError(ColearnError, ValueError):
    """No noisy-setting bound exists for the requested rule."""


class EnumerationLimitError(ColearnError, RuntimeError):
    pass
