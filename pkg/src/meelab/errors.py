"""Exception types raised across the package."""


class MeeLabError(Exception):
    """Base class for all package errors."""


class ConfigError(MeeLabError, ValueError):
    pass


class ShapeError(MeeLabError, ValueError):
    pass


class UsageError(MeeLabError, ValueError):
    pass


class TrainingError(MeeLabError, RuntimeError):
    pass


class NumericError(MeeLabError, ArithmeticError):
    pass


class IngestionError(MeeLabError, ValueError):
    pass


class PreprocessError(MeeLabError, ValueError):
    pass


class EvaluationError(MeeLabError, ValueError):
    pass
