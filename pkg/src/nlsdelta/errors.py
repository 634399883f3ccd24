"""Exception types shared by the package."""


class NLSDeltaError(Exception):
    pass


class ConfigurationError(NLSDeltaError, ValueError):
    pass


class DomainError(NLSDeltaError, ValueError):
    pass


class ConvergenceError(NLSDeltaError, RuntimeError):
    pass


class InstabilityError(NLSDeltaError, RuntimeError):
    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class PoleError(NLSDeltaError, ZeroDivisionError):
    pass


class AccuracyError(NLSDeltaError, RuntimeError):
    pass


class ConsistencyError(NLSDeltaError, AssertionError):
    pass


class InsufficientDataError(NLSDeltaError, ValueError):
    pass
