"""Exception hierarchy shared by the library and the CLI."""


class TwoModeError(Exception):
    """Base class for all package errors."""


class InvalidInputError(TwoModeError, ValueError):
    """Bad parameter values, unknown keys, malformed files."""


class PoleError(TwoModeError, ArithmeticError):
    """An energy denominator vanished (or fell below the pole guard).

    ``state`` names the intermediate or final state that went resonant.
    """

    def __init__(self, message, state=None, denominator=None):
        super().__init__(message)
        self.state = state
        self.denominator = denominator


class CapacityError(TwoModeError):
    def __init__(self, message, dimension):
        super().__init__(message)
        self.dimension = dimension


class StepControlError(TwoModeError):
    def __init__(self, message, achieved_error):
        super().__init__(message)
        self.achieved_error = achieved_error


class ExtractionError(TwoModeError):
    """Survival curve unsuitable for a decay-rate fit."""


class RateBelowResolution(ExtractionError):
    pass
